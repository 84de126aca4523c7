"""Hard-constrained ansatz fields.

exact_bc:        v = L(x) * u_net(x) + G(x), so v restricts to the boundary
                 data exactly (L vanishes on the boundary, G extends g).
unconstrained:   v = u_net(x); boundary data only enters through penalties.
parabolic_exact: v = u0(x) + t * L(x) * u_net(t, x), matching the initial
                 slice exactly and pinning the lateral boundary to zero data.

The map from network jets to ansatz jets is linear at every node (the
Leibniz rule applied to a fixed factor), which the loss assembly exploits.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import geometry, network
from .geometry import Domain, SpaceTimeBox
from .jets import TaylorJet, coeff_layout, product_terms, seed_variable
from .network import NetworkParams

MODES = ("exact_bc", "unconstrained", "parabolic_exact")


def product_matrix_batch(factor_jets: np.ndarray, dim: int, order: int) -> np.ndarray:
    """Matrices P with (factor * u) jets = P @ (u jets), one per node."""
    lay = coeff_layout(dim, order)
    n = factor_jets.shape[0]
    P = np.zeros((n, lay.size, lay.size))
    for out_c, a_c, b_c, count in product_terms(dim, order):
        P[:, out_c, b_c] += count * factor_jets[:, a_c]
    return P


@dataclass(frozen=True)
class AnsatzSpec:
    """Network plus the boundary-conforming composition it is used in."""

    params: NetworkParams
    domain: Domain
    mode: str = "exact_bc"
    lift: object = None      # G: jet-evaluable extension of the boundary data
    initial: object = None   # u0 for parabolic_exact (spatial field)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown ansatz mode {self.mode!r}")
        if self.params.widths[0] != self.domain.dim:
            raise ValueError(
                f"network input width {self.params.widths[0]} does not match "
                f"domain dimension {self.domain.dim}"
            )
        if self.params.widths[-1] != 1:
            raise ValueError("ansatz networks are scalar valued")
        if self.mode == "parabolic_exact":
            if not isinstance(self.domain, SpaceTimeBox):
                raise ValueError("parabolic_exact needs a space-time domain")
            if self.initial is None:
                raise ValueError("parabolic_exact needs the initial field u0")
        elif isinstance(self.domain, SpaceTimeBox):
            raise ValueError(f"{self.mode} ansatz needs a spatial domain")

    # -- parameter plumbing --------------------------------------------------

    def with_params(self, flat) -> "AnsatzSpec":
        return replace(self, params=self.params.with_flat(flat))

    def input_scaling(self):
        """Affine map onto [-1, 1]^d from the domain bounding box."""
        lo, hi = self.domain.bounding_box()
        scale = 2.0 / (hi - lo)
        shift = -(hi + lo) / (hi - lo)
        return scale, shift

    # -- network jets ----------------------------------------------------------

    def network_jets(self, X, order: int, need_cache: bool = False):
        scale, shift = self.input_scaling()
        return network.forward_jets(self.params, X, order, scale, shift, need_cache)

    # -- composition data ------------------------------------------------------

    def composition(self, X, order: int):
        """Per-node linear map (P, base) with v_jets = P @ u_jets + base.

        P is None in unconstrained mode (identity).
        """
        X = np.asarray(X, dtype=float)
        lay = coeff_layout(self.domain.dim, order)
        if self.mode == "unconstrained":
            base = np.zeros((X.shape[0], lay.size))
            if self.lift is not None:
                raise ValueError("unconstrained mode does not take a lift")
            return None, base
        if order == 0:
            # value-only composition: P is the multiplying factor itself
            if self.mode == "exact_bc":
                fac = np.array([geometry.distance_factor(self.domain, x) for x in X])
                base = (self.lift.values(X) if self.lift is not None
                        else np.zeros(X.shape[0]))
            else:
                spatial = self.domain.spatial
                fac = X[:, 0] * np.array(
                    [geometry.distance_factor(spatial, x[1:]) for x in X])
                base = self.initial.values(X[:, 1:])
            return fac[:, None, None], base[:, None]
        if self.mode == "exact_bc":
            L = geometry.distance_jets(self.domain, X, order)
            P = product_matrix_batch(L, self.domain.dim, order)
            if self.lift is None:
                base = np.zeros((X.shape[0], lay.size))
            else:
                base = np.asarray(self.lift.jets(X, order), dtype=float)
            return P, base
        # parabolic_exact: factor t * L(x), base u0(x) with zero time derivatives
        W = np.empty((X.shape[0], lay.size))
        spatial = self.domain.spatial
        for k in range(X.shape[0]):
            t_jet = seed_variable(0, X[k, 0], order, self.domain.dim)
            L_sp = geometry.distance_jet(spatial, X[k, 1:], order)
            L_ext = _time_extend_jet(L_sp, order)
            W[k] = (t_jet * L_ext).coeffs
        P = product_matrix_batch(W, self.domain.dim, order)
        from .fields import TimeExtendedField

        base = TimeExtendedField(self.initial).jets(X, order)
        return P, base

    # -- evaluation --------------------------------------------------------------

    def jets(self, X, order: int) -> np.ndarray:
        """Packed jets of the ansatz field v at a batch of nodes."""
        X = np.asarray(X, dtype=float)
        U = self.network_jets(X, order)
        P, base = self.composition(X, order)
        if P is None:
            return U + base
        return np.einsum("ncd,nd->nc", P, U) + base

    def jet(self, x, order: int) -> TaylorJet:
        """Ansatz jet at a single point."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return TaylorJet(self.domain.dim, order, self.jets(x[None, :], order)[0])

    def values(self, X) -> np.ndarray:
        """Plain values of v (order-0 pass)."""
        X = np.asarray(X, dtype=float)
        U = self.network_jets(X, 0)[:, 0]
        if self.mode == "unconstrained":
            return U
        if self.mode == "exact_bc":
            L = np.array([geometry.distance_factor(self.domain, x) for x in X])
            G = self.lift.values(X) if self.lift is not None else 0.0
            return L * U + G
        spatial = self.domain.spatial
        L = np.array([geometry.distance_factor(spatial, x[1:]) for x in X])
        u0 = self.initial.values(X[:, 1:])
        return X[:, 0] * L * U + u0

    def value(self, x) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return float(self.values(x[None, :])[0])


def _time_extend_jet(spatial_jet: TaylorJet, order: int) -> TaylorJet:
    dim = spatial_jet.dim + 1
    lay_in = coeff_layout(spatial_jet.dim, order)
    lay_out = coeff_layout(dim, order)
    c = np.zeros(lay_out.size)
    for k, mi in enumerate(lay_in.multi_indices):
        c[lay_out.position(tuple(i + 1 for i in mi))] = spatial_jet.coeffs[k]
    return TaylorJet(dim, order, c)


def build_spec(domain: Domain, mode: str = "exact_bc", lift=None, initial=None,
               hidden=(16, 16), seed: int = 0) -> AnsatzSpec:
    """Fresh Xavier-initialised spec with the default two-hidden-layer net."""
    widths = (domain.dim,) + tuple(hidden) + (1,)
    params = NetworkParams.xavier(widths, seed=seed)
    return AnsatzSpec(params=params, domain=domain, mode=mode, lift=lift, initial=initial)
