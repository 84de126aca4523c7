"""Quadrature-discretised residual losses and their exact gradients.

At every node the strong-form residual is a fixed linear functional of the
ansatz jets, and the ansatz jets are a fixed linear map of the network jets
(Leibniz rule with the distance factor).  Each loss therefore precomputes,
once, per-node row vectors C and offsets d with

    residual components r = C @ (network jets) + d,
    loss = sum_nodes w * |r|^2,

after which evaluation is a jet forward pass and the parameter gradient is
one reverse sweep with cotangent 2 w r C on the output jets.

Variants: interior (exact-boundary residual), penalty (interior residual
plus tau * boundary misfit), sobolev_k1 (residual plus its gradient, one
extra derivative order), parabolic (space-time heat residual).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import network
from .ansatz import AnsatzSpec
from .jets import coeff_layout
from .problems import PdeProblem
from .quadrature import QuadratureRule, build_rule, kahan_sum

VARIANTS = ("interior", "penalty", "sobolev_k1", "parabolic")


@dataclass(frozen=True)
class LossConfig:
    """Which loss to assemble and on which quadrature rules."""

    variant: str = "interior"
    tau: Optional[float] = None
    interior: Optional[QuadratureRule] = None
    boundary: Optional[QuadratureRule] = None
    spacetime: Optional[QuadratureRule] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown loss variant {self.variant!r}")
        if self.variant == "penalty":
            if self.tau is None or not self.tau > 0:
                raise ValueError("penalty loss needs a positive weight tau")
            if self.boundary is None:
                raise ValueError("penalty loss needs a boundary rule")
        elif self.tau is not None:
            raise ValueError("tau only applies to the penalty loss")
        if self.variant == "parabolic":
            if self.spacetime is None:
                raise ValueError("parabolic loss needs a space-time rule")
        elif self.interior is None:
            raise ValueError(f"{self.variant} loss needs an interior rule")


def make_config(problem: PdeProblem, variant: str = "interior", n: int = 24,
                tau: Optional[float] = None) -> LossConfig:
    """Default rules for a problem: one tensor rule per needed target."""
    if variant == "parabolic":
        return LossConfig(variant=variant,
                          spacetime=build_rule(problem.domain, "spacetime", n))
    interior = build_rule(problem.domain, "interior", n)
    if variant == "penalty":
        return LossConfig(variant=variant, tau=tau if tau is not None else 1.0,
                          interior=interior,
                          boundary=build_rule(problem.domain, "boundary", n))
    return LossConfig(variant=variant, interior=interior)


# -- residual rows -------------------------------------------------------------


def residual_rows(problem: PdeProblem, X, order: int, with_gradient: bool = False):
    """Rows R and offsets c with residual components r_m = R_m . (v jets) + c_m.

    with_gradient adds one row per coordinate for the residual gradient
    (needs order 3 and a differentiable right-hand side).
    """
    X = np.asarray(X, dtype=float)
    d = problem.domain.dim
    lay = coeff_layout(d, order)
    pos = lay.position
    n = X.shape[0]

    if problem.kind == "poisson":
        m = 1 + (d if with_gradient else 0)
        rows = np.zeros((n, m, lay.size))
        const = np.zeros((n, m))
        for i in range(d):
            rows[:, 0, pos((i, i))] = 1.0
        const[:, 0] = problem.rhs.values(X)
        if with_gradient:
            if not hasattr(problem.rhs, "partial"):
                raise TypeError("gradient rows need a right-hand side with closed-form partials")
            for k in range(d):
                for i in range(d):
                    rows[:, 1 + k, pos((k, i, i))] += 1.0
                const[:, 1 + k] = problem.rhs.partial(k).values(X)
        return rows, const

    if problem.kind == "elliptic_divA":
        if with_gradient:
            raise ValueError("gradient-augmented residuals are only assembled for poisson problems")
        rows = np.zeros((n, 1, lay.size))
        A = problem.coeff.values(X)
        for i in range(d):
            for j in range(i, d):
                mult = 1.0 if i == j else 2.0
                rows[:, 0, pos((i, j))] = mult * A[:, i, j]
        for k, div_k in enumerate(problem.coeff_div):
            rows[:, 0, pos((k,))] = div_k.values(X)
        const = problem.rhs.values(X)[:, None]
        return rows, const

    # heat: r = d_t v - Laplace_x v - f on (t, x...) nodes
    if with_gradient:
        raise ValueError("gradient-augmented residuals are only assembled for poisson problems")
    rows = np.zeros((n, 1, lay.size))
    rows[:, 0, pos((0,))] = 1.0
    for i in range(1, d):
        rows[:, 0, pos((i, i))] = -1.0
    const = -problem.rhs.values(X)[:, None]
    return rows, const


# -- objective -----------------------------------------------------------------


@dataclass(frozen=True)
class _Block:
    nodes: np.ndarray
    weights: np.ndarray  # quadrature weights, already scaled (e.g. by tau)
    order: int
    cmat: np.ndarray     # (N, M, C) rows acting on network jets
    dvec: np.ndarray     # (N, M) residual offsets


class Objective:
    """A discretised loss bound to one ansatz structure.

    ``value`` and ``value_and_grad`` take the flat parameter vector, so
    optimisation and finite-difference probing never rebuild the geometry.
    """

    def __init__(self, spec: AnsatzSpec, blocks: list[_Block]):
        self.spec = spec
        self.blocks = blocks
        self._scale, self._shift = spec.input_scaling()

    @property
    def n_params(self) -> int:
        return self.spec.params.n_params

    def _residuals(self, params, block, need_cache=False):
        out = network.forward_jets(params, block.nodes, block.order,
                                   self._scale, self._shift, need_cache)
        jets, cache = out if need_cache else (out, None)
        r = np.einsum("nmc,nc->nm", block.cmat, jets) + block.dvec
        return r, cache

    def value(self, flat) -> float:
        params = self.spec.params.with_flat(flat)
        parts = []
        for block in self.blocks:
            r, _ = self._residuals(params, block)
            parts.append(block.weights * np.sum(r * r, axis=1))
        return kahan_sum(np.concatenate(parts))

    def value_and_grad(self, flat):
        params = self.spec.params.with_flat(flat)
        grad = np.zeros(self.n_params)
        parts = []
        for block in self.blocks:
            r, cache = self._residuals(params, block, need_cache=True)
            parts.append(block.weights * np.sum(r * r, axis=1))
            out_bar = np.einsum("nm,nmc->nc", 2.0 * block.weights[:, None] * r, block.cmat)
            grad += network.backward_jets(params, cache, out_bar, block.order)
        return kahan_sum(np.concatenate(parts)), grad


def _compose_block(spec, problem, rule, order, with_gradient=False, weight=1.0):
    rows, const = residual_rows(problem, rule.nodes, order, with_gradient)
    P, base = spec.composition(rule.nodes, order)
    if P is None:
        cmat = rows
    else:
        cmat = np.einsum("nmc,ncd->nmd", rows, P)
    dvec = const + np.einsum("nmc,nc->nm", rows, base)
    return _Block(rule.nodes, weight * rule.weights, order, cmat, dvec)


def _boundary_block(spec, problem, rule, tau):
    # misfit v - g at boundary nodes, value-only jets
    n = rule.n_nodes
    rows = np.ones((n, 1, 1))
    g = problem.boundary.values(rule.nodes) if problem.boundary is not None else np.zeros(n)
    const = -g[:, None]
    P, base = spec.composition(rule.nodes, 0)
    cmat = rows if P is None else np.einsum("nmc,ncd->nmd", rows, P)
    dvec = const + np.einsum("nmc,nc->nm", rows, base)
    return _Block(rule.nodes, tau * rule.weights, 0, cmat, dvec)


def build_objective(spec: AnsatzSpec, problem: PdeProblem, cfg: LossConfig) -> Objective:
    """Check the ansatz, problem, and loss config agree, then assemble blocks."""
    v = cfg.variant
    if v == "interior":
        if spec.mode != "exact_bc":
            raise ValueError("interior loss requires an exact-boundary ansatz")
        if problem.kind == "heat":
            raise ValueError("interior loss covers spatial problems; use the parabolic loss")
        return Objective(spec, [_compose_block(spec, problem, cfg.interior, 2)])
    if v == "penalty":
        if problem.kind == "heat":
            raise ValueError("penalty loss covers spatial problems")
        if spec.mode not in ("unconstrained", "exact_bc"):
            raise ValueError("penalty loss needs an unconstrained or exact-boundary ansatz")
        return Objective(spec, [
            _compose_block(spec, problem, cfg.interior, 2),
            _boundary_block(spec, problem, cfg.boundary, cfg.tau),
        ])
    if v == "sobolev_k1":
        if spec.mode != "exact_bc":
            raise ValueError("sobolev_k1 loss requires an exact-boundary ansatz")
        if problem.kind != "poisson":
            raise ValueError("sobolev_k1 loss is assembled for poisson problems")
        return Objective(spec, [_compose_block(spec, problem, cfg.interior, 3,
                                               with_gradient=True)])
    # parabolic
    if spec.mode != "parabolic_exact":
        raise ValueError("parabolic loss requires a parabolic_exact ansatz")
    if problem.kind != "heat":
        raise ValueError("parabolic loss covers heat problems")
    return Objective(spec, [_compose_block(spec, problem, cfg.spacetime, 2)])


# -- public loss values ----------------------------------------------------------


def interior_loss(spec: AnsatzSpec, problem: PdeProblem, cfg: LossConfig) -> float:
    """||residual||^2 over the interior rule, boundary conditions exact."""
    return build_objective(spec, problem, cfg).value(spec.params.flatten())


def penalty_loss(spec: AnsatzSpec, problem: PdeProblem, cfg: LossConfig) -> float:
    """Interior residual plus tau * squared L2 boundary misfit."""
    return build_objective(spec, problem, cfg).value(spec.params.flatten())


def sobolev_loss(spec: AnsatzSpec, problem: PdeProblem, cfg: LossConfig) -> float:
    """Residual plus residual-gradient misfit (first-order Sobolev residual)."""
    return build_objective(spec, problem, cfg).value(spec.params.flatten())


def parabolic_loss(spec: AnsatzSpec, problem: PdeProblem, cfg: LossConfig) -> float:
    """Space-time L2 norm squared of the heat residual."""
    return build_objective(spec, problem, cfg).value(spec.params.flatten())


def loss_value(spec: AnsatzSpec, problem: PdeProblem, cfg: LossConfig) -> float:
    return build_objective(spec, problem, cfg).value(spec.params.flatten())


# -- residuals of arbitrary jet-evaluable fields ----------------------------------


def field_residual_sq(field, problem: PdeProblem, rule: QuadratureRule,
                      with_gradient: bool = False) -> float:
    """Squared residual norm of any jet-evaluable field (e.g. the manufactured
    solution, or an analytic family member) under a problem's operator."""
    order = 3 if with_gradient else 2
    rows, const = residual_rows(problem, rule.nodes, order, with_gradient)
    jets = np.asarray(field.jets(rule.nodes, order), dtype=float)
    r = np.einsum("nmc,nc->nm", rows, jets) + const
    return kahan_sum(rule.weights * np.sum(r * r, axis=1))
