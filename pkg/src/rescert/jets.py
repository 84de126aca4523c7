"""Truncated Taylor-jet arithmetic in one to three variables, orders 1 to 3.

A jet carries the raw derivatives of a scalar field at a point: value,
gradient, Hessian and, at order 3, third derivatives.  Coefficients live in
a flat array with one slot per sorted multi-index (see ``coeff_layout``), so
symmetric entries share storage by construction.  Sums, products (Leibniz
rule) and compositions with elementary functions (Faa di Bruno) propagate
derivatives exactly; Laplacians and their gradients are then read off a
single evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "TaylorJet",
    "coeff_layout",
    "product_terms",
    "seed_variable",
    "seed_constant",
    "seed_point",
    "tanh",
    "sin",
    "cos",
    "exp",
    "power",
    "laplacian",
    "grad_laplacian",
]

_DIMS = (1, 2, 3)
_ORDERS = (1, 2, 3)


@dataclass(frozen=True)
class CoeffLayout:
    """Packed coefficient order: (), (i,), (i,j) with i<=j, (i,j,k) with i<=j<=k."""

    dim: int
    order: int
    multi_indices: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.multi_indices)

    @property
    def grad_offset(self) -> int:
        return 1

    @property
    def hess_offset(self) -> int:
        return 1 + self.dim

    @property
    def third_offset(self) -> int:
        return 1 + self.dim + self.dim * (self.dim + 1) // 2

    def position(self, idx: tuple[int, ...]) -> int:
        """Packed slot of the derivative named by a multi-index (any index order)."""
        return _position_table(self.dim, self.order)[tuple(sorted(idx))]

    def pairs(self):
        return self.multi_indices[self.hess_offset:self.third_offset]

    def triples(self):
        return self.multi_indices[self.third_offset:]


@lru_cache(maxsize=None)
def _position_table(dim, order):
    lay = coeff_layout(dim, order)
    return {mi: c for c, mi in enumerate(lay.multi_indices)}


@lru_cache(maxsize=None)
def coeff_layout(dim: int, order: int) -> CoeffLayout:
    # order 0 (value only) is permitted internally for plain evaluation passes
    if dim not in _DIMS:
        raise ValueError(f"jet dimension must be 1, 2 or 3, got {dim}")
    if order not in (0,) + _ORDERS:
        raise ValueError(f"jet order must be 1, 2 or 3, got {order}")
    mi: list[tuple[int, ...]] = [()]
    if order >= 1:
        mi += [(i,) for i in range(dim)]
    if order >= 2:
        mi += [(i, j) for i in range(dim) for j in range(i, dim)]
    if order >= 3:
        mi += [
            (i, j, k)
            for i in range(dim)
            for j in range(i, dim)
            for k in range(j, dim)
        ]
    return CoeffLayout(dim, order, tuple(mi))


@lru_cache(maxsize=None)
def product_terms(dim: int, order: int):
    """Leibniz-rule contractions on packed jets.

    Returns tuples (out, a, b, count) meaning: the packed coefficient ``out``
    of a product receives ``count * A[a] * B[b]``.  Counts are the multinomial
    multiplicities obtained by distributing the derivative operators of the
    output multi-index over the two factors.
    """
    lay = coeff_layout(dim, order)
    pos = _position_table(dim, order)
    counts: dict[tuple[int, int, int], int] = {}
    for out_c, mi in enumerate(lay.multi_indices):
        k = len(mi)
        for mask in range(1 << k):
            a_idx = tuple(sorted(mi[p] for p in range(k) if mask >> p & 1))
            b_idx = tuple(sorted(mi[p] for p in range(k) if not mask >> p & 1))
            key = (out_c, pos[a_idx], pos[b_idx])
            counts[key] = counts.get(key, 0) + 1
    return tuple((o, a, b, c) for (o, a, b), c in sorted(counts.items()))


class TaylorJet:
    """Derivatives of a scalar field at a point, truncated at ``order``.

    ``coeffs`` is the packed storage described by ``coeff_layout(dim, order)``.
    ``hess`` and ``third`` expose symmetric views assembled from that storage,
    so mirrored entries are always identical.
    """

    __slots__ = ("dim", "order", "coeffs")

    def __init__(self, dim: int, order: int, coeffs):
        if dim not in _DIMS:
            raise ValueError(f"jet dimension must be 1, 2 or 3, got {dim}")
        if order not in _ORDERS:
            raise ValueError(f"jet order must be 1, 2 or 3, got {order}")
        coeffs = np.asarray(coeffs, dtype=float)
        expected = coeff_layout(dim, order).size
        if coeffs.shape != (expected,):
            raise ValueError(
                f"need {expected} packed coefficients for dim={dim} order={order}, "
                f"got shape {coeffs.shape}"
            )
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("TaylorJet is immutable")

    # -- accessors ---------------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    @property
    def grad(self) -> np.ndarray:
        return self.coeffs[1:1 + self.dim].copy()

    @property
    def hess(self) -> np.ndarray:
        """Full symmetric Hessian assembled from the packed upper triangle."""
        if self.order < 2:
            raise ValueError("jet order < 2 carries no Hessian")
        lay = coeff_layout(self.dim, self.order)
        h = np.empty((self.dim, self.dim))
        for c, (i, j) in enumerate(lay.pairs(), start=lay.hess_offset):
            h[i, j] = h[j, i] = self.coeffs[c]
        return h

    @property
    def third(self) -> np.ndarray:
        """Full symmetric third-derivative tensor (order-3 jets only)."""
        if self.order < 3:
            raise ValueError("jet order < 3 carries no third derivatives")
        lay = coeff_layout(self.dim, self.order)
        t = np.empty((self.dim,) * 3)
        for c, idx in enumerate(lay.triples(), start=lay.third_offset):
            for perm in _permutations3(idx):
                t[perm] = self.coeffs[c]
        return t

    def d(self, *idx: int) -> float:
        """Single derivative by multi-index, e.g. ``j.d(0, 1)`` for d2/dx dy."""
        if len(idx) > self.order:
            raise ValueError(
                f"derivative of order {len(idx)} not carried by an order-{self.order} jet"
            )
        for i in idx:
            if not 0 <= i < self.dim:
                raise ValueError(f"coordinate index {i} out of range for dim {self.dim}")
        lay = coeff_layout(self.dim, self.order)
        return float(self.coeffs[lay.position(idx)])

    def __repr__(self):
        return f"TaylorJet(dim={self.dim}, order={self.order}, coeffs={self.coeffs!r})"

    # -- arithmetic --------------------------------------------------------

    def _check_compat(self, other: "TaylorJet"):
        if self.dim != other.dim or self.order != other.order:
            raise ValueError(
                f"jet mismatch: dim/order ({self.dim},{self.order}) vs "
                f"({other.dim},{other.order})"
            )

    def __add__(self, other):
        if isinstance(other, TaylorJet):
            self._check_compat(other)
            return TaylorJet(self.dim, self.order, self.coeffs + other.coeffs)
        if isinstance(other, (int, float)):
            c = self.coeffs.copy()
            c[0] += other
            return TaylorJet(self.dim, self.order, c)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return TaylorJet(self.dim, self.order, -self.coeffs)

    def __sub__(self, other):
        if isinstance(other, TaylorJet):
            self._check_compat(other)
            return TaylorJet(self.dim, self.order, self.coeffs - other.coeffs)
        if isinstance(other, (int, float)):
            return self.__add__(-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, TaylorJet):
            self._check_compat(other)
            out = np.zeros_like(self.coeffs)
            for o, a, b, count in product_terms(self.dim, self.order):
                out[o] += count * self.coeffs[a] * other.coeffs[b]
            return TaylorJet(self.dim, self.order, out)
        if isinstance(other, (int, float)):
            return TaylorJet(self.dim, self.order, self.coeffs * other)
        return NotImplemented

    __rmul__ = __mul__


def _permutations3(idx):
    i, j, k = idx
    return {(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)}


# -- seeds -----------------------------------------------------------------


def seed_variable(i: int, x: float, order: int, dim: int) -> TaylorJet:
    """Jet of the coordinate function x_i at a point with value x."""
    if not 0 <= i < dim:
        raise ValueError(f"variable index {i} out of range for dim {dim}")
    c = np.zeros(coeff_layout(dim, order).size)
    c[0] = x
    c[1 + i] = 1.0
    return TaylorJet(dim, order, c)


def seed_constant(value: float, order: int, dim: int) -> TaylorJet:
    c = np.zeros(coeff_layout(dim, order).size)
    c[0] = value
    return TaylorJet(dim, order, c)


def seed_point(x, order: int) -> list[TaylorJet]:
    """Coordinate jets for every component of a point."""
    x = np.asarray(x, dtype=float)
    dim = x.shape[0]
    return [seed_variable(i, float(x[i]), order, dim) for i in range(dim)]


# -- elementary functions (Faa di Bruno with univariate derivative tables) --


def _tanh_table(x):
    t = math.tanh(x)
    s = 1.0 - t * t
    return (t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0))


def _sin_table(x):
    s, c = math.sin(x), math.cos(x)
    return (s, c, -s, -c)


def _cos_table(x):
    s, c = math.sin(x), math.cos(x)
    return (c, -s, -c, s)


def _exp_table(x):
    e = math.exp(x)
    return (e, e, e, e)


def _power_table(x, p):
    if x < 0 and p != int(p):
        raise ValueError(f"power with non-integer exponent {p} at negative base {x}")
    out = []
    coef = 1.0
    for k in range(4):
        if coef == 0.0:
            out.append(0.0)
        else:
            out.append(coef * math.pow(x, p - k))
        coef *= p - k
    return tuple(out)


def _compose(a: TaylorJet, table) -> TaylorJet:
    """Faa di Bruno: jet of f(a) from the derivative table of f at a.value."""
    d0, d1, d2, d3 = table
    lay = coeff_layout(a.dim, a.order)
    ac = a.coeffs
    out = np.zeros_like(ac)
    out[0] = d0
    g0 = lay.grad_offset
    out[g0:g0 + a.dim] = d1 * ac[g0:g0 + a.dim]
    if a.order >= 2:
        h0 = lay.hess_offset
        for c, (i, j) in enumerate(lay.pairs(), start=h0):
            out[c] = d1 * ac[c] + d2 * ac[g0 + i] * ac[g0 + j]
    if a.order >= 3:
        t0 = lay.third_offset
        pos = lay.position
        for c, (i, j, k) in enumerate(lay.triples(), start=t0):
            gi, gj, gk = ac[g0 + i], ac[g0 + j], ac[g0 + k]
            out[c] = (
                d1 * ac[c]
                + d2 * (gi * ac[pos((j, k))] + gj * ac[pos((i, k))] + gk * ac[pos((i, j))])
                + d3 * gi * gj * gk
            )
    return TaylorJet(a.dim, a.order, out)


def tanh(a: TaylorJet) -> TaylorJet:
    return _compose(a, _tanh_table(a.value))


def sin(a: TaylorJet) -> TaylorJet:
    return _compose(a, _sin_table(a.value))


def cos(a: TaylorJet) -> TaylorJet:
    return _compose(a, _cos_table(a.value))


def exp(a: TaylorJet) -> TaylorJet:
    return _compose(a, _exp_table(a.value))


def power(a: TaylorJet, exponent: float) -> TaylorJet:
    return _compose(a, _power_table(a.value, exponent))


# -- differential extractors -------------------------------------------------


def laplacian(a: TaylorJet) -> float:
    """Trace of the Hessian.  Requires order >= 2."""
    if a.order < 2:
        raise ValueError("laplacian needs a jet of order >= 2")
    lay = coeff_layout(a.dim, a.order)
    return float(sum(a.coeffs[lay.position((i, i))] for i in range(a.dim)))


def grad_laplacian(a: TaylorJet) -> np.ndarray:
    """Gradient of the Laplacian, one entry per coordinate.  Requires order 3."""
    if a.order < 3:
        raise ValueError("grad_laplacian needs a jet of order 3")
    lay = coeff_layout(a.dim, a.order)
    out = np.empty(a.dim)
    for k in range(a.dim):
        out[k] = sum(a.coeffs[lay.position((k, i, i))] for i in range(a.dim))
    return out
