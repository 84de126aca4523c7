"""Built-in problems and loss assembly: manufactured solutions really solve
their PDEs, discretised losses hit closed-form values, and the penalty /
exact-boundary algebra behaves as advertised."""

import numpy as np
import pytest

from rescert.ansatz import build_spec
from rescert.fields import AnalyticField
from rescert.losses import (LossConfig, build_objective, field_residual_sq,
                            interior_loss, make_config, parabolic_loss,
                            penalty_loss, sobolev_loss)
from rescert.network import forward_jets
from rescert.problems import builtin_problems, default_spec, get_problem, pointwise_residual
from rescert.quadrature import build_rule

PI = np.pi


def zero_spec(problem, mode=None, hidden=(8, 8)):
    spec = default_spec(problem, hidden=hidden, seed=0, mode=mode)
    return spec.with_params(np.zeros(spec.params.n_params))


# -- manufactured solutions ----------------------------------------------------


@pytest.mark.parametrize("name", ["P1", "P2", "P3", "P5"])
def test_exact_solution_has_zero_strong_residual(name):
    problem = get_problem(name)
    rng = np.random.default_rng(3)
    for _ in range(12):
        x = rng.uniform(0.05, 0.95, size=2)
        if name == "P2":
            x = x - 0.5  # disk is centred at the origin
        r = pointwise_residual(problem, problem.exact.jet(x, 2), x)
        assert abs(r) < 1e-10


def test_heat_solution_has_zero_strong_residual():
    p4 = get_problem("P4")
    rng = np.random.default_rng(4)
    for _ in range(12):
        txy = rng.uniform((0.0, 0.05, 0.05), (0.2, 0.95, 0.95))
        r = pointwise_residual(p4, p4.exact.jet(txy, 2), txy)
        assert abs(r) < 1e-10


def test_manufactured_rhs_values():
    p1 = get_problem("P1")
    assert p1.rhs.value([0.5, 0.5]) == pytest.approx(2 * PI**2, rel=1e-14)
    p2 = get_problem("P2")
    # -laplace[(1 - x^2 - y^2)/4] = 1 everywhere
    for x in ([0.0, 0.0], [0.3, -0.4], [0.7, 0.1]):
        assert p2.rhs.value(x) == pytest.approx(1.0, rel=1e-14)
    p5 = get_problem("P5")
    assert p5.rhs.value([0.3, 0.8]) == 0.0  # x^2 - y^2 is harmonic
    p4 = get_problem("P4")
    assert p4.rhs.value([0.1, 0.3, 0.7]) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("name", ["P1", "P2", "P3", "P4", "P5"])
def test_exact_solution_integrated_residual_vanishes(name):
    problem = get_problem(name)
    target = "spacetime" if problem.kind == "heat" else "interior"
    rule = build_rule(problem.domain, target, 12)
    assert field_residual_sq(problem.exact, problem, rule) < 1e-20


def test_p3_coefficient_is_uniformly_elliptic():
    p3 = get_problem("P3")
    assert p3.ellipticity == 1.0
    rng = np.random.default_rng(7)
    X = rng.uniform(0.0, 1.0, size=(50, 2))
    A = p3.coeff.values(X)
    for k in range(50):
        xi = rng.standard_normal(2)
        quad = xi @ A[k] @ xi
        assert quad >= p3.ellipticity * (xi @ xi) - 1e-12


def test_p3_residual_rows_match_symbolic_operator():
    # independent route: apply div(A grad .) + f to a non-solution symbolically
    import sympy as sp

    p3 = get_problem("P3")
    x, y = sp.symbols("x1 x2")
    v = x**3 * y**2
    a = 1 + (x**2 + y**2) / 2
    strong = sp.diff(a * sp.diff(v, x), x) + sp.diff(a * sp.diff(v, y), y)
    want = sp.lambdify((x, y), strong, "numpy")
    field = AnalyticField("x1**3 * x2**2", sp.symbols("x1 x2"))
    rng = np.random.default_rng(11)
    for _ in range(10):
        p = rng.uniform(0.1, 0.9, size=2)
        got = pointwise_residual(p3, field.jet(p, 2), p)
        assert got == pytest.approx(want(*p) + p3.rhs.value(p), rel=1e-10, abs=1e-10)


# -- frozen loss values of trivial ansatz fields ---------------------------------


def test_zero_network_losses_hit_closed_forms():
    # v = 0: the loss is the squared norm of the data term alone
    p1 = get_problem("P1")
    got = interior_loss(zero_spec(p1), p1, make_config(p1, "interior", n=24))
    assert got == pytest.approx(PI**4, rel=1e-12)

    got = sobolev_loss(zero_spec(p1), p1, make_config(p1, "sobolev_k1", n=24))
    assert got == pytest.approx(PI**4 + 2 * PI**6, rel=1e-12)
    assert got == pytest.approx(2020.187478184611, rel=1e-12)

    p2 = get_problem("P2")
    got = interior_loss(zero_spec(p2), p2, make_config(p2, "interior", n=24))
    assert got == pytest.approx(PI, rel=1e-12)


def test_zero_network_parabolic_loss():
    # v = u0(x) for all t: residual is -laplace(u0) = 2 pi^2 u0, f = 0
    p4 = get_problem("P4")
    got = parabolic_loss(zero_spec(p4), p4, make_config(p4, "parabolic", n=16))
    assert got == pytest.approx(0.2 * PI**4, rel=1e-10)


def test_field_residual_sq_nonsolution_closed_forms():
    # poisson route: v = x^2 y on P1, integral worked out by hand
    p1 = get_problem("P1")
    v = AnalyticField.from_string("x1**2 * x2", 2)
    rule = build_rule(p1.domain, "interior", 24)
    assert field_residual_sq(v, p1, rule) == pytest.approx(52.0 / 3.0 + PI**4, rel=1e-12)

    # heat route: w = t x(1-x) y(1-y) on P4, integral 163/67500
    p4 = get_problem("P4")
    w = AnalyticField.from_string("t * x*(1-x) * y*(1-y)", 3, spacetime=True)
    srule = build_rule(p4.domain, "spacetime", 10)
    assert field_residual_sq(w, p4, srule) == pytest.approx(163.0 / 67500.0, rel=1e-12)


# -- penalty / exact-boundary relations ------------------------------------------


def test_penalty_equals_interior_for_boundary_exact_ansatz():
    # the boundary term contributes exactly zero when conditions hold by design
    p1 = get_problem("P1")
    spec = default_spec(p1, hidden=(8, 8), seed=1)
    cfg_i = make_config(p1, "interior", n=12)
    cfg_p = make_config(p1, "penalty", n=12, tau=50.0)
    rng = np.random.default_rng(21)
    for _ in range(10):
        s = spec.with_params(rng.standard_normal(spec.params.n_params))
        li = interior_loss(s, p1, cfg_i)
        lp = penalty_loss(s, p1, cfg_p)
        assert lp == pytest.approx(li, rel=1e-14)


def test_penalty_loss_is_affine_in_tau():
    p5 = get_problem("P5")
    spec = default_spec(p5, hidden=(8, 8), seed=3, mode="unconstrained")
    losses = {tau: penalty_loss(spec, p5, make_config(p5, "penalty", n=12, tau=tau))
              for tau in (1.0, 2.0, 3.0)}
    slope12 = losses[2.0] - losses[1.0]
    slope23 = losses[3.0] - losses[2.0]
    assert slope12 == pytest.approx(slope23, rel=1e-12)
    assert slope12 > 0

    # slope == squared boundary misfit, evaluated directly from the raw network
    brule = build_rule(p5.domain, "boundary", 12)
    scale, shift = spec.input_scaling()
    vals = forward_jets(spec.params, brule.nodes, 0, scale, shift)[:, 0]
    g = p5.boundary.values(brule.nodes)
    misfit_sq = float(np.sum(brule.weights * (vals - g) ** 2))
    assert slope12 == pytest.approx(misfit_sq, rel=1e-12)


def test_sobolev_loss_dominates_interior_loss():
    p1 = get_problem("P1")
    spec = default_spec(p1, hidden=(8, 8), seed=5)
    rng = np.random.default_rng(31)
    for _ in range(5):
        s = spec.with_params(rng.standard_normal(spec.params.n_params) * 0.5)
        li = interior_loss(s, p1, make_config(p1, "interior", n=10))
        ls = sobolev_loss(s, p1, make_config(p1, "sobolev_k1", n=10))
        assert ls >= li


def test_objective_gradient_matches_value():
    p1 = get_problem("P1")
    spec = default_spec(p1, hidden=(6,), seed=9)
    obj = build_objective(spec, p1, make_config(p1, "interior", n=8))
    flat = spec.params.flatten()
    v0 = obj.value(flat)
    v1, g = obj.value_and_grad(flat)
    assert v1 == v0
    # directional derivative vs central differences
    rng = np.random.default_rng(17)
    d = rng.standard_normal(flat.size)
    d /= np.linalg.norm(d)
    h = 1e-6
    fd = (obj.value(flat + h * d) - obj.value(flat - h * d)) / (2 * h)
    assert float(g @ d) == pytest.approx(fd, rel=1e-6, abs=1e-10)


# -- configuration validation -----------------------------------------------------


def test_loss_config_validation():
    p1 = get_problem("P1")
    rule = build_rule(p1.domain, "interior", 4)
    brule = build_rule(p1.domain, "boundary", 4)
    with pytest.raises(ValueError, match="variant"):
        LossConfig(variant="bogus", interior=rule)
    with pytest.raises(ValueError, match="tau"):
        LossConfig(variant="penalty", interior=rule, boundary=brule)
    with pytest.raises(ValueError, match="tau"):
        LossConfig(variant="penalty", tau=-2.0, interior=rule, boundary=brule)
    with pytest.raises(ValueError, match="boundary"):
        LossConfig(variant="penalty", tau=1.0, interior=rule)
    with pytest.raises(ValueError, match="tau"):
        LossConfig(variant="interior", tau=1.0, interior=rule)
    with pytest.raises(ValueError):
        LossConfig(variant="interior")
    with pytest.raises(ValueError, match="space-time"):
        LossConfig(variant="parabolic")


def test_build_objective_rejects_mismatched_modes():
    p1 = get_problem("P1")
    p4 = get_problem("P4")
    free = default_spec(p1, hidden=(4,), seed=0, mode="unconstrained")
    with pytest.raises(ValueError, match="exact-boundary"):
        build_objective(free, p1, make_config(p1, "interior", n=4))
    with pytest.raises(ValueError, match="exact-boundary"):
        build_objective(free, p1, make_config(p1, "sobolev_k1", n=4))
    exact = default_spec(p1, hidden=(4,), seed=0)
    with pytest.raises(ValueError, match="parabolic_exact"):
        build_objective(exact, p1, LossConfig(
            variant="parabolic", spacetime=build_rule(p4.domain, "spacetime", 4)))
    heat_spec = default_spec(p4, hidden=(4,), seed=0)
    with pytest.raises(ValueError, match="heat"):
        build_objective(heat_spec, p1, LossConfig(
            variant="parabolic", spacetime=build_rule(p4.domain, "spacetime", 4)))
    with pytest.raises(ValueError, match="poisson"):
        p3 = get_problem("P3")
        build_objective(default_spec(p3, hidden=(4,), seed=0), p3,
                        LossConfig(variant="sobolev_k1",
                                   interior=build_rule(p3.domain, "interior", 4)))


def test_problem_registry():
    reg = builtin_problems()
    assert sorted(reg) == ["P1", "P2", "P3", "P4", "P5"]
    with pytest.raises(KeyError, match="P9"):
        get_problem("P9")
    kinds = {reg[k].kind for k in reg}
    assert kinds == {"poisson", "elliptic_divA", "heat"}
