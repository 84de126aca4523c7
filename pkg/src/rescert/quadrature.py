"""Deterministic quadrature rules and quadrature-based Sobolev norms.

Tensor Gauss-Legendre everywhere a box direction exists; disks combine a
radial Gauss rule (the Jacobian r is absorbed into the weights) with a
uniform angular grid, which integrates trigonometric polynomials below the
node count exactly.  All reductions use compensated (Kahan) summation over a
fixed node order, so repeated runs are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi
from typing import Callable

import numpy as np

from .geometry import Disk, Domain, Interval, Rectangle, SpaceTimeBox
from .jets import coeff_layout

TARGETS = ("interior", "boundary", "spacetime")


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes (N, d), positive weights (N,), and the generating metadata."""

    nodes: np.ndarray
    weights: np.ndarray
    domain: Domain
    target: str
    exactness_degree: int  # per-axis polynomial degree integrated exactly, where applicable

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]


def kahan_sum(values) -> float:
    """Compensated summation in array order."""
    total = 0.0
    comp = 0.0
    for v in np.asarray(values, dtype=float).ravel():
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return float(total)


def _gauss01(n: int):
    """Gauss-Legendre nodes/weights on (0, 1)."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _gauss(a: float, b: float, n: int):
    x, w = _gauss01(n)
    return a + (b - a) * x, (b - a) * w


def build_rule(domain: Domain, target: str, n: int) -> QuadratureRule:
    """Quadrature for a domain target with n nodes per tensor direction.

    interior: tensor Gauss-Legendre; disks use radial Gauss x 4n uniform
    angles.  boundary: Gauss-Legendre per rectangle edge, 4n uniform angular
    nodes on a circle, the two endpoints (unit weights) of an interval.
    spacetime: Gauss-Legendre in time tensored with the spatial interior rule.
    """
    if target not in TARGETS:
        raise ValueError(f"unknown quadrature target {target!r}")
    if n < 2:
        raise ValueError("node count per direction must be >= 2")

    if isinstance(domain, SpaceTimeBox):
        if target != "spacetime":
            raise ValueError("space-time domains only carry the 'spacetime' target")
        tq, tw = _gauss(0.0, domain.horizon, n)
        srule = build_rule(domain.spatial, "interior", n)
        nodes = np.empty((n * srule.n_nodes, domain.dim))
        weights = np.empty(n * srule.n_nodes)
        for k in range(n):
            sl = slice(k * srule.n_nodes, (k + 1) * srule.n_nodes)
            nodes[sl, 0] = tq[k]
            nodes[sl, 1:] = srule.nodes
            weights[sl] = tw[k] * srule.weights
        return QuadratureRule(nodes, weights, domain, target, 2 * n - 1)

    if target == "spacetime":
        raise ValueError("'spacetime' target needs a space-time domain")

    if isinstance(domain, Interval):
        if target == "interior":
            x, w = _gauss(domain.a, domain.b, n)
            return QuadratureRule(x[:, None], w, domain, target, 2 * n - 1)
        nodes = np.array([[domain.a], [domain.b]])
        return QuadratureRule(nodes, np.ones(2), domain, target, 0)

    if isinstance(domain, Rectangle):
        if target == "interior":
            x, wx = _gauss(domain.lo[0], domain.hi[0], n)
            y, wy = _gauss(domain.lo[1], domain.hi[1], n)
            nodes = np.empty((n * n, 2))
            weights = np.empty(n * n)
            for i in range(n):
                sl = slice(i * n, (i + 1) * n)
                nodes[sl, 0] = x[i]
                nodes[sl, 1] = y
                weights[sl] = wx[i] * wy
            return QuadratureRule(nodes, weights, domain, target, 2 * n - 1)
        # one Gauss panel per edge, in a fixed order: bottom, top, left, right
        x, wx = _gauss(domain.lo[0], domain.hi[0], n)
        y, wy = _gauss(domain.lo[1], domain.hi[1], n)
        parts = []
        for const, axis, q, w in (
            (domain.lo[1], 1, x, wx),
            (domain.hi[1], 1, x, wx),
            (domain.lo[0], 0, y, wy),
            (domain.hi[0], 0, y, wy),
        ):
            nd = np.empty((n, 2))
            nd[:, axis] = const
            nd[:, 1 - axis] = q
            parts.append((nd, w))
        nodes = np.concatenate([p[0] for p in parts])
        weights = np.concatenate([p[1] for p in parts])
        return QuadratureRule(nodes, weights, domain, target, 2 * n - 1)

    if isinstance(domain, Disk):
        m = 4 * n  # angular nodes; exact for trig polynomials of degree < 4n
        theta = 2.0 * pi * np.arange(m) / m
        ct, st = np.cos(theta), np.sin(theta)
        cx, cy = domain.center
        if target == "interior":
            r, wr = _gauss(0.0, domain.radius, n)
            nodes = np.empty((n * m, 2))
            weights = np.empty(n * m)
            for k in range(n):
                sl = slice(k * m, (k + 1) * m)
                nodes[sl, 0] = cx + r[k] * ct
                nodes[sl, 1] = cy + r[k] * st
                weights[sl] = wr[k] * r[k] * (2.0 * pi / m)
            return QuadratureRule(nodes, weights, domain, target, 2 * n - 1)
        nodes = np.column_stack([cx + domain.radius * ct, cy + domain.radius * st])
        weights = np.full(m, domain.radius * 2.0 * pi / m)
        return QuadratureRule(nodes, weights, domain, target, 2 * n - 1)

    raise TypeError(f"no quadrature for domain {type(domain).__name__}")


def target_measure(rule: QuadratureRule) -> float:
    """Analytic measure of the integrated set (for weight-sum checks)."""
    if rule.target == "boundary":
        return rule.domain.boundary_measure
    return rule.domain.measure


def integrate(rule: QuadratureRule, field: Callable) -> float:
    """Integrate a pointwise callable over the rule.  Fails loudly on
    non-finite values, naming the offending node."""
    vals = np.empty(rule.n_nodes)
    for k in range(rule.n_nodes):
        vals[k] = field(rule.nodes[k])
        if not np.isfinite(vals[k]):
            raise ValueError(
                f"field evaluated to {vals[k]} at node {k} = {rule.nodes[k]!r}"
            )
    return kahan_sum(rule.weights * vals)


def integrate_values(rule: QuadratureRule, values) -> float:
    values = np.asarray(values, dtype=float)
    if values.shape != (rule.n_nodes,):
        raise ValueError(f"expected {rule.n_nodes} values, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        k = int(np.argmin(np.isfinite(values)))
        raise ValueError(f"non-finite value at node {k} = {rule.nodes[k]!r}")
    return kahan_sum(rule.weights * values)


# -- Sobolev norms of differences --------------------------------------------


def _jet_difference(v, ref, nodes, order) -> np.ndarray:
    J = np.asarray(v.jets(nodes, order), dtype=float)
    if ref is not None:
        J = J - np.asarray(ref.jets(nodes, order), dtype=float)
    return J


def _sq_norms_upto(e: np.ndarray, dim: int, order: int) -> list[np.ndarray]:
    """Per-node squared derivative masses [value, gradient, Hessian] up to order.

    The Hessian part is the full Frobenius norm: mixed entries count twice.
    """
    lay = coeff_layout(dim, order)
    parts = [e[:, 0] ** 2]
    if order >= 1:
        parts.append(np.sum(e[:, 1:1 + dim] ** 2, axis=1))
    if order >= 2:
        acc = np.zeros(e.shape[0])
        for c, (i, j) in enumerate(lay.pairs(), start=lay.hess_offset):
            mult = 1.0 if i == j else 2.0
            acc += mult * e[:, c] ** 2
        parts.append(acc)
    return parts


def sobolev_error(v, ref, s: int, rule: QuadratureRule) -> float:
    """Full H^s distance (s in {0, 1, 2}) between two jet-evaluable fields.

    Pass ref=None to measure v against zero.
    """
    if s not in (0, 1, 2):
        raise ValueError(f"sobolev_error supports s in {{0, 1, 2}}, got {s}")
    order = max(s, 0)
    dim = rule.nodes.shape[1]
    e = _jet_difference(v, ref, rule.nodes, order) if s > 0 else None
    if s == 0:
        vals = np.asarray(v.values(rule.nodes), dtype=float)
        if ref is not None:
            vals = vals - np.asarray(ref.values(rule.nodes), dtype=float)
        density = vals**2
    else:
        density = np.zeros(rule.n_nodes)
        for part in _sq_norms_upto(e, dim, order):
            density += part
    return float(np.sqrt(integrate_values(rule, density)))


def sobolev_errors_upto(v, ref, rule: QuadratureRule, s_max: int = 2):
    """(H^0, ..., H^s_max) distances from a single jet evaluation."""
    dim = rule.nodes.shape[1]
    e = _jet_difference(v, ref, rule.nodes, s_max)
    parts = _sq_norms_upto(e, dim, s_max)
    out = []
    density = np.zeros(rule.n_nodes)
    for s in range(s_max + 1):
        density = density + parts[s]
        out.append(float(np.sqrt(integrate_values(rule, density))))
    return tuple(out)


def h_half_surrogate(v, ref, rule: QuadratureRule) -> float:
    """Interpolation surrogate sqrt(||e||_L2 * ||e||_H1).

    This is a computable stand-in for the H^(1/2) norm, not the fractional
    norm itself; it is log-convexly wedged between the L2 and H1 norms.
    """
    l2, h1 = sobolev_errors_upto(v, ref, rule, s_max=1)
    return float(np.sqrt(l2 * h1))


def grad_laplacian_error(v, ref, rule: QuadratureRule) -> float:
    """L2 norm of grad(Laplacian) of the difference; a proxy for the H^3
    seminorm gap.  Needs order-3 jets."""
    dim = rule.nodes.shape[1]
    lay = coeff_layout(dim, 3)
    e = _jet_difference(v, ref, rule.nodes, 3)
    density = np.zeros(rule.n_nodes)
    for k in range(dim):
        comp = np.zeros(rule.n_nodes)
        for i in range(dim):
            comp += e[:, lay.position((k, i, i))]
        density += comp**2
    return float(np.sqrt(integrate_values(rule, density)))


def x_norm_error(v, ref, rule: QuadratureRule) -> float:
    """Parabolic energy distance ||d_t e||_{L2(L2)} + ||e||_{L2(H2)} on a
    space-time rule with (t, x...) nodes."""
    if rule.target != "spacetime":
        raise ValueError("x_norm_error needs a space-time rule")
    dim = rule.nodes.shape[1]
    lay = coeff_layout(dim, 2)
    e = _jet_difference(v, ref, rule.nodes, 2)
    dt_sq = e[:, 1] ** 2  # time derivative is the first gradient slot
    h2_sq = e[:, 0] ** 2
    for i in range(1, dim):
        h2_sq = h2_sq + e[:, 1 + i] ** 2
    for c, (i, j) in enumerate(lay.pairs(), start=lay.hess_offset):
        if i == 0 or j == 0:
            continue  # spatial Hessian only
        mult = 1.0 if i == j else 2.0
        h2_sq = h2_sq + mult * e[:, c] ** 2
    a = integrate_values(rule, dt_sq)
    b = integrate_values(rule, h2_sq)
    return float(np.sqrt(a) + np.sqrt(b))


def boundary_misfit(v, g, rule: QuadratureRule) -> float:
    """L2 boundary misfit ||v - g|| on a boundary rule; g=None means zero data."""
    if rule.target != "boundary":
        raise ValueError("boundary_misfit needs a boundary rule")
    vals = np.asarray(v.values(rule.nodes), dtype=float)
    if g is not None:
        vals = vals - np.asarray(g.values(rule.nodes), dtype=float)
    return float(np.sqrt(integrate_values(rule, vals**2)))
