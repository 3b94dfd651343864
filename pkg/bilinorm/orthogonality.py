"""Birkhoff-James orthogonality and positive/negative parts.

Memberships are decided from the one-sided derivatives of t -> ||x + t y||
at t = 0, which equal the max and min of f(y) over the extreme supporting
functionals f of x. The golden-section oracles minimise the same convex
function directly and share nothing with the derivative route except the
norm itself.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy.typing as npt
import structlog

from bilinorm.config import DEFAULT_TOLERANCES, Tolerances
from bilinorm.decision import Decision, Verdict, all_of
from bilinorm.spaces import Space, ZeroAnchor, as_vector

logger = structlog.get_logger()

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2

# Oracle bracket [-R, R] with R = BRACKET_FACTOR * ||x|| / ||y||
BRACKET_FACTOR = 4.0
# Golden-section width, relative to R
ORACLE_WIDTH = 1e-11


@dataclass(frozen=True)
class OneSidedDerivatives:
    """Right and left derivatives of t -> ||x + t y|| at t = 0."""

    d_plus: float
    d_minus: float

    def to_dict(self) -> dict[str, float]:
        return {"d_plus": self.d_plus, "d_minus": self.d_minus}


def one_sided_derivatives(
    space: Space,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> OneSidedDerivatives:
    """Max and min of f(y) over the extreme supporting functionals at x.

    Raises:
        ZeroAnchor: If x is numerically zero
    """
    support = space.support_functionals(x, tol)
    values = support.pairings(as_vector(y, space.dim))
    return OneSidedDerivatives(float(values.max()), float(values.min()))


def sign_verdict(value: float, scale: float, tol: Tolerances) -> Verdict:
    """Decide ``value >= 0`` relative to ``scale``.

    Values within eps_eq of zero count as zero; values inside the band
    (eps_eq, eps_band] are inconclusive.
    """
    if scale <= tol.eps_zero:
        return Verdict.HOLDS
    ratio = value / scale
    if abs(ratio) <= tol.eps_eq:
        return Verdict.HOLDS
    if abs(ratio) <= tol.eps_band:
        return Verdict.INCONCLUSIVE
    return Verdict.HOLDS if ratio > 0 else Verdict.FAILS


def in_positive_part(
    space: Space,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
    scale: Optional[float] = None,
) -> Decision:
    """Whether ||x + t y|| >= ||x|| for all t >= 0.

    ``scale`` defaults to ||y|| and sets the unit of the marginal band.
    """
    derivatives = one_sided_derivatives(space, x, y, tol)
    scale = space.norm(y) if scale is None else scale
    return Decision(
        sign_verdict(derivatives.d_plus, scale, tol), derivatives.to_dict()
    )


def in_negative_part(
    space: Space,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
    scale: Optional[float] = None,
) -> Decision:
    """Whether ||x + t y|| >= ||x|| for all t <= 0."""
    derivatives = one_sided_derivatives(space, x, y, tol)
    scale = space.norm(y) if scale is None else scale
    return Decision(
        sign_verdict(-derivatives.d_minus, scale, tol), derivatives.to_dict()
    )


def is_bj_orthogonal(
    space: Space,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
    scale: Optional[float] = None,
) -> Decision:
    """x is Birkhoff-James orthogonal to y: y lies in both parts of x."""
    derivatives = one_sided_derivatives(space, x, y, tol)
    scale = space.norm(y) if scale is None else scale
    plus = Decision(sign_verdict(derivatives.d_plus, scale, tol))
    minus = Decision(sign_verdict(-derivatives.d_minus, scale, tol))
    return Decision(all_of([plus, minus]), derivatives.to_dict())


def golden_section_min(
    f: Callable[[float], float], a: float, b: float, width: float
) -> tuple[float, float]:
    """Golden-section search for the minimum of a convex f on [a, b].

    Returns the best evaluated (t, f(t)), endpoints included, after shrinking
    the bracket below ``width``.
    """
    a, b = min(a, b), max(a, b)
    best_t, best_value = min(((a, f(a)), (b, f(b))), key=lambda tv: tv[1])
    h = b - a
    if h <= width:
        return best_t, best_value

    # Required steps to achieve the width
    n = int(math.ceil(math.log(width / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)
    for t, v in ((c, yc), (d, yd)):
        if v < best_value:
            best_t, best_value = t, v

    for _ in range(n - 1):
        if yc < yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
            if yc < best_value:
                best_t, best_value = c, yc
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)
            if yd < best_value:
                best_t, best_value = d, yd

    return best_t, best_value


def gap_verdict(reference: float, minimum: float, tol: Tolerances) -> Verdict:
    """Classify the relative dip of a minimum below ``reference``."""
    gap = (reference - minimum) / reference
    if gap <= tol.eps_zero:
        return Verdict.HOLDS
    if gap > tol.eps_eq:
        return Verdict.FAILS
    return Verdict.INCONCLUSIVE


def _scan_oracle(
    space: Space,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    lower: bool,
    upper: bool,
    tol: Tolerances,
) -> Decision:
    xv = as_vector(x, space.dim)
    yv = as_vector(y, space.dim)
    x_norm = space.norm(xv)
    if x_norm <= tol.eps_zero:
        raise ZeroAnchor(x_norm)
    y_norm = space.norm(yv)
    if y_norm <= tol.eps_zero:
        return Decision.holds("zero direction", minimum=x_norm, argmin=0.0)

    # Outside [-R, R], ||x + t y|| >= |t| ||y|| - ||x|| >= 3 ||x||.
    radius = BRACKET_FACTOR * x_norm / y_norm
    t, minimum = golden_section_min(
        lambda s: space.norm(xv + s * yv),
        -radius if lower else 0.0,
        radius if upper else 0.0,
        ORACLE_WIDTH * radius,
    )
    verdict = gap_verdict(x_norm, minimum, tol)
    return Decision(verdict, {"minimum": minimum, "argmin": t, "norm": x_norm})


def bj_oracle(
    space: Space,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Decision:
    """Minimise t -> ||x + t y|| over all t and compare with ||x||."""
    return _scan_oracle(space, x, y, lower=True, upper=True, tol=tol)


def positive_part_oracle(
    space: Space,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Decision:
    """Minimise t -> ||x + t y|| over t >= 0."""
    return _scan_oracle(space, x, y, lower=False, upper=True, tol=tol)


def negative_part_oracle(
    space: Space,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Decision:
    """Minimise t -> ||x + t y|| over t <= 0."""
    return _scan_oracle(space, x, y, lower=True, upper=False, tol=tol)
