"""A posteriori error certificates from training losses.

For the Dirichlet Laplacian on a convex domain the residual controls the
full H2 error with the explicit constant

    c_reg = sqrt(1 + (|Omega| / omega_d)^(1/d)),

omega_d the unit-ball volume, so ||v - u||_H2 <= c_reg * sqrt(loss) holds for
any ansatz with exact boundary values.  Constants from this formula carry
provenance "convex_formula"; constants the caller supplies carry
"user_supplied"; everything else is "unknown_labeled_heuristic" and is never
marked certified.  Measured errors are compared against bounds with a fixed
2 percent quadrature headroom, recorded on every report.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt
from typing import Optional

from .geometry import Disk, Domain, Interval, Rectangle, SpaceTimeBox
from .problems import PdeProblem

PROVENANCE_CONVEX = "convex_formula"
PROVENANCE_USER = "user_supplied"
PROVENANCE_HEURISTIC = "unknown_labeled_heuristic"
PROVENANCES = (PROVENANCE_CONVEX, PROVENANCE_USER, PROVENANCE_HEURISTIC)

NORM_H2 = "H2"
NORM_X_PARABOLIC = "X_parabolic"
NORM_H_HALF = "H_half_surrogate"

QUAD_HEADROOM = 0.02

UNIT_BALL_VOLUME = {1: 2.0, 2: pi, 3: 4.0 * pi / 3.0}


class BoundViolation(RuntimeError):
    """A measured error exceeded a certified bound beyond the headroom."""


@dataclass(frozen=True)
class CertifiedReport:
    """One certificate: bound = constant * sqrt(loss) in the named norm."""

    norm_label: str
    loss: float
    constant: float
    constant_provenance: str
    bound: float
    certified: bool
    measured_error: Optional[float] = None
    headroom: float = QUAD_HEADROOM
    note: str = ""

    def __post_init__(self):
        if self.constant_provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.constant_provenance!r}")
        if self.certified and self.constant_provenance == PROVENANCE_HEURISTIC:
            raise ValueError("heuristic constants cannot be certified")

    def bound_holds(self) -> bool:
        """measured_error <= bound * (1 + headroom); vacuously true if unmeasured."""
        if self.measured_error is None:
            return True
        return self.measured_error <= self.bound * (1.0 + self.headroom)

    def check(self) -> "CertifiedReport":
        if self.certified and not self.bound_holds():
            raise BoundViolation(
                f"{self.norm_label} error {self.measured_error:.6e} exceeds "
                f"bound {self.bound:.6e} (headroom {self.headroom:.0%})"
            )
        return self

    CSV_HEADER = "variant,loss,constant,provenance,bound,measured_error,certified"

    def csv_row(self) -> str:
        me = "" if self.measured_error is None else repr(self.measured_error)
        return (f"{self.norm_label},{self.loss!r},{self.constant!r},"
                f"{self.constant_provenance},{self.bound!r},{me},{self.certified}")

    def text_block(self) -> str:
        lines = [
            f"norm:        {self.norm_label}",
            f"loss:        {self.loss!r}",
            f"constant:    {self.constant!r}  ({self.constant_provenance})",
            f"bound:       {self.bound!r}",
            f"headroom:    {self.headroom!r}",
            f"certified:   {self.certified}",
        ]
        if self.measured_error is not None:
            lines.append(f"measured:    {self.measured_error!r}  "
                         f"(holds: {self.bound_holds()})")
        if self.note:
            lines.append(f"note:        {self.note}")
        return "\n".join(lines)


def _check_loss(loss: float) -> float:
    loss = float(loss)
    if not loss >= 0.0:
        raise ValueError(f"loss must be nonnegative, got {loss}")
    return loss


def c_reg_convex(domain: Domain) -> float:
    """Explicit regularity constant for convex domains."""
    if isinstance(domain, SpaceTimeBox):
        raise TypeError("c_reg_convex applies to spatial domains")
    if not isinstance(domain, (Interval, Rectangle, Disk)):
        raise TypeError(f"no convex-domain constant for {type(domain).__name__}")
    d = domain.dim
    return sqrt(1.0 + (domain.measure / UNIT_BALL_VOLUME[d]) ** (1.0 / d))


def certified_h2_bound(loss: float, domain: Domain,
                       problem: Optional[PdeProblem] = None,
                       user_constant: Optional[float] = None,
                       measured_error: Optional[float] = None) -> CertifiedReport:
    """H2 certificate for an exact-boundary residual loss.

    The convex formula applies to the Laplacian; for other operators a
    user-supplied constant is required for certification, otherwise the
    report is labelled heuristic with constant 1.
    """
    loss = _check_loss(loss)
    if user_constant is not None:
        if not user_constant > 0:
            raise ValueError("user-supplied constant must be positive")
        c, prov, certified = float(user_constant), PROVENANCE_USER, True
        note = "constant supplied by caller"
    elif problem is None or problem.kind == "poisson":
        c, prov, certified = c_reg_convex(domain), PROVENANCE_CONVEX, True
        note = ""
    else:
        c, prov, certified = 1.0, PROVENANCE_HEURISTIC, False
        note = (f"no explicit constant for kind {problem.kind!r}; "
                "sqrt(loss) reported without certification")
    return CertifiedReport(
        norm_label=NORM_H2, loss=loss, constant=c, constant_provenance=prov,
        bound=c * sqrt(loss), certified=certified,
        measured_error=measured_error, note=note,
    )


@dataclass(frozen=True)
class CeaReport:
    """Split of the loss into optimisation gap and best-in-ensemble part.

    delta is measured against the best loss seen across an ensemble, not the
    true infimum over the parameter class, and is flagged as such.
    """

    loss: float
    loss_best: float
    delta_estimate: float
    constant: float
    bound: float
    note: str = "delta is ensemble-relative; the true infimum is not computable"


def cea_decomposition(loss: float, loss_best: float, domain: Domain) -> CeaReport:
    """Quasi-optimality split: bound^2 = c^2 * (delta + loss_best) = c^2 * loss."""
    loss = _check_loss(loss)
    loss_best = _check_loss(loss_best)
    if loss_best > loss * (1.0 + 1e-12) + 1e-300:
        raise ValueError(
            f"ensemble best loss {loss_best} exceeds the candidate loss {loss}"
        )
    c = c_reg_convex(domain)
    delta = max(loss - loss_best, 0.0)
    return CeaReport(loss=loss, loss_best=loss_best, delta_estimate=delta,
                     constant=c, bound=c * sqrt(loss))


def interp_hs_bound(s: float, h_half_value: float, h2_value: float) -> float:
    """Interpolated H^s bound from H^(1/2) and H2 quantities, s in [1/2, 2]:
    value = h_half^(2(2-s)/3) * h2^((2s-1)/3)."""
    if not 0.5 <= s <= 2.0:
        raise ValueError(f"interpolation order s must lie in [1/2, 2], got {s}")
    if h_half_value < 0 or h2_value < 0:
        raise ValueError("norm values must be nonnegative")
    return h_half_value ** (2.0 * (2.0 - s) / 3.0) * h2_value ** ((2.0 * s - 1.0) / 3.0)


def penalty_h_half_estimator(loss_tau: float, tau: float) -> CertifiedReport:
    """Penalty-training error indicator (1 + tau^(-1/2)) * sqrt(loss).

    The constant multiplying this scaling is not computable here, so the
    report is heuristic and never certified; above H^(1/2) no estimate of
    this form holds at all.
    """
    loss_tau = _check_loss(loss_tau)
    if not tau > 0:
        raise ValueError(f"penalty weight tau must be positive, got {tau}")
    c = 1.0 + tau ** -0.5
    return CertifiedReport(
        norm_label=NORM_H_HALF, loss=loss_tau, constant=c,
        constant_provenance=PROVENANCE_HEURISTIC, bound=c * sqrt(loss_tau),
        certified=False,
        note="H^(1/2)-scale indicator up to an unknown domain constant; "
             "penalty losses certify nothing stronger",
    )


def parabolic_bound(loss: float, constant: Optional[float] = None,
                    measured_error: Optional[float] = None) -> CertifiedReport:
    """Space-time energy-norm certificate ||error||_X <= C * sqrt(loss).

    C is the operator norm of the solution map of the heat equation on the
    given cylinder; no formula is fabricated for it.  Callers either supply
    it (certified) or receive sqrt(loss) labelled heuristic.
    """
    loss = _check_loss(loss)
    if constant is not None:
        if not constant > 0:
            raise ValueError("parabolic constant must be positive")
        return CertifiedReport(
            norm_label=NORM_X_PARABOLIC, loss=loss, constant=float(constant),
            constant_provenance=PROVENANCE_USER, bound=constant * sqrt(loss),
            certified=True, measured_error=measured_error,
            note="constant supplied by caller",
        )
    return CertifiedReport(
        norm_label=NORM_X_PARABOLIC, loss=loss, constant=1.0,
        constant_provenance=PROVENANCE_HEURISTIC, bound=sqrt(loss),
        certified=False, measured_error=measured_error,
        note="solution-map norm unknown; sqrt(loss) reported without certification",
    )
