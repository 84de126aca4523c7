"""Domains, distance factors, lifts, and the hard-constrained ansatz."""

import numpy as np
import pytest

from rescert.ansatz import AnsatzSpec, build_spec
from rescert.fields import AnalyticField, TimeExtendedField, symbols_for
from rescert.geometry import (Disk, Interval, Rectangle, SpaceTimeBox,
                              distance_factor, distance_jet, distance_jets)
from rescert.network import NetworkParams
from rescert.problems import get_problem, default_spec
from rescert.quadrature import build_rule

UNIT_SQUARE = Rectangle((0.0, 0.0), (1.0, 1.0))
UNIT_DISK = Disk((0.0, 0.0), 1.0)


def test_domain_measures():
    assert Interval(0.0, 2.0).measure == 2.0
    assert Interval(0.0, 2.0).boundary_measure == 2.0  # counting measure
    assert UNIT_SQUARE.measure == 1.0
    assert UNIT_SQUARE.boundary_measure == 4.0
    assert UNIT_DISK.measure == pytest.approx(np.pi)
    assert UNIT_DISK.boundary_measure == pytest.approx(2 * np.pi)
    box = SpaceTimeBox(0.2, UNIT_SQUARE)
    assert box.measure == pytest.approx(0.2)
    assert box.dim == 3


def test_domain_validation():
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)
    with pytest.raises(ValueError):
        Rectangle((0.0, 0.0), (1.0, -1.0))
    with pytest.raises(ValueError):
        Disk((0.0, 0.0), 0.0)
    with pytest.raises(ValueError):
        SpaceTimeBox(-0.1, UNIT_SQUARE)
    with pytest.raises(ValueError):
        SpaceTimeBox(1.0, SpaceTimeBox(1.0, UNIT_SQUARE))


def test_distance_factor_values():
    assert distance_factor(UNIT_SQUARE, [0.5, 0.5]) == pytest.approx(1.0 / 16.0)
    assert distance_factor(UNIT_DISK, [0.0, 0.0]) == 1.0
    assert distance_factor(UNIT_SQUARE, [0.0, 0.7]) == 0.0
    assert distance_factor(Interval(0.0, 1.0), [0.25]) == pytest.approx(0.1875)


def test_distance_factor_sign():
    rng = np.random.default_rng(0)
    for dom in (UNIT_SQUARE, UNIT_DISK, Interval(-1.0, 2.0)):
        lo, hi = dom.bounding_box()
        for _ in range(50):
            x = rng.uniform(lo, hi)
            if dom.contains(x, tol=-1e-9):  # strictly inside
                assert distance_factor(dom, x) > 0.0


def test_distance_jets_match_closed_form():
    # independent route: jets of the closed-form polynomial via sympy fields
    sq = AnalyticField.from_string("x1*(1-x1)*x2*(1-x2)", dim=2)
    dk = AnalyticField.from_string("1 - x1**2 - x2**2", dim=2)
    rng = np.random.default_rng(5)
    X = rng.uniform(0.1, 0.9, size=(6, 2))
    for dom, field in ((UNIT_SQUARE, sq), (UNIT_DISK, dk)):
        got = distance_jets(dom, X, 3)
        want = field.jets(X, 3)
        assert np.allclose(got, want, rtol=1e-12, atol=1e-12)
        j = distance_jet(dom, X[0], 2)
        assert j.value == pytest.approx(field.value(X[0]))


def test_lift_field_examples():
    g = AnalyticField.from_string("x1 + x2", dim=2)
    assert g.value([0.3, 0.4]) == pytest.approx(0.7)
    h = AnalyticField.from_string("x1**2 - x2**2", dim=2)
    assert h.value([1.0, 0.0]) == 1.0
    with pytest.raises(ValueError):
        AnalyticField.from_string("x1 + x3", dim=2)  # unknown symbol


def test_exact_bc_boundary_values():
    # random networks: v = L*u + G matches g on boundary quadrature nodes
    for pid in ("P1", "P2", "P5"):
        problem = get_problem(pid)
        spec = default_spec(problem, hidden=(8, 8), seed=13)
        rule = build_rule(problem.domain, "boundary", 20)
        vals = spec.values(rule.nodes)
        g = (problem.boundary.values(rule.nodes) if problem.boundary is not None
             else np.zeros(rule.n_nodes))
        assert np.max(np.abs(vals - g)) < 1e-12


def test_zero_network_gives_lift():
    problem = get_problem("P5")
    spec = default_spec(problem, hidden=(8, 8), seed=1)
    spec = spec.with_params(np.zeros(spec.params.n_params))
    rng = np.random.default_rng(2)
    X = rng.uniform(0.05, 0.95, size=(20, 2))
    assert np.allclose(spec.values(X), problem.exact.values(X), atol=1e-14)


def test_parabolic_initial_and_lateral_slices():
    problem = get_problem("P4")
    spec = default_spec(problem, hidden=(8, 8), seed=21)
    srule = build_rule(UNIT_SQUARE, "interior", 10)

    # t = 0: value u0 and spatial gradient grad u0, any parameters
    nodes0 = np.column_stack([np.zeros(srule.n_nodes), srule.nodes])
    jets = spec.jets(nodes0, 1)
    u0 = problem.initial
    assert np.max(np.abs(jets[:, 0] - u0.values(srule.nodes))) < 1e-12
    want_dx = u0.jets(srule.nodes, 1)[:, 1:3]
    assert np.max(np.abs(jets[:, 2:4] - want_dx)) < 1e-12

    # lateral boundary: v = 0 at any time
    brule = build_rule(UNIT_SQUARE, "boundary", 10)
    for t in (0.0, 0.07, 0.2):
        nb = np.column_stack([np.full(brule.n_nodes, t), brule.nodes])
        assert np.max(np.abs(spec.values(nb))) < 1e-12


def test_ansatz_jets_match_finite_differences():
    # second independent route: nest central differences of spec.value
    problem = get_problem("P2")
    spec = default_spec(problem, hidden=(6, 5), seed=3)
    x0 = np.array([0.21, -0.33])
    j = spec.jet(x0, 2)
    h = 1e-5

    def val(p):
        return spec.value(p)

    for i in range(2):
        e = np.zeros(2); e[i] = h
        fd = (val(x0 + e) - val(x0 - e)) / (2 * h)
        assert j.grad[i] == pytest.approx(fd, rel=1e-7, abs=1e-9)
    for i in range(2):
        for k in range(2):
            ei = np.zeros(2); ei[i] = h
            ek = np.zeros(2); ek[k] = h
            fd = (val(x0 + ei + ek) - val(x0 + ei - ek)
                  - val(x0 - ei + ek) + val(x0 - ei - ek)) / (4 * h * h)
            assert j.hess[i, k] == pytest.approx(fd, rel=5e-5, abs=1e-6)


def test_input_scaling_maps_bbox():
    spec = build_spec(Rectangle((2.0, -1.0), (4.0, 3.0)), hidden=(4,), seed=0)
    scale, shift = spec.input_scaling()
    lo = np.array([2.0, -1.0]); hi = np.array([4.0, 3.0])
    assert np.allclose(lo * scale + shift, [-1.0, -1.0])
    assert np.allclose(hi * scale + shift, [1.0, 1.0])


def test_spec_validation():
    with pytest.raises(ValueError):
        build_spec(UNIT_SQUARE, mode="nonsense")
    params = NetworkParams.xavier((3, 4, 1), seed=0)
    with pytest.raises(ValueError):
        AnsatzSpec(params=params, domain=UNIT_SQUARE, mode="exact_bc")  # dim mismatch
    with pytest.raises(ValueError):
        build_spec(SpaceTimeBox(0.5, UNIT_SQUARE), mode="parabolic_exact")  # no initial


def test_time_extended_field_jets():
    u0 = AnalyticField.from_string("sin(pi*x1)*sin(pi*x2)", dim=2)
    f = TimeExtendedField(u0)
    X = np.array([[0.1, 0.3, 0.4], [0.2, 0.6, 0.9]])  # (t, x, y)
    jets = f.jets(X, 2)
    want = u0.jets(X[:, 1:], 2)
    assert np.allclose(jets[:, 0], want[:, 0])
    assert np.allclose(jets[:, 1], 0.0)          # d/dt
    assert np.allclose(jets[:, 2:4], want[:, 1:3])  # spatial gradient
