"""Semi-inner-products compatible with a norm.

A selector picks one supporting functional f_x for every unit vector x; the
semi-inner-product is then [y, x] = ||x|| f_{x/||x||}(y). Selectors are
canonicalised so that f_{-x} = -f_x holds bit for bit.
"""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import numpy.typing as npt
import structlog

from bilinorm.config import DEFAULT_TOLERANCES, Tolerances
from bilinorm.decision import Decision
from bilinorm.spaces import (
    Functional,
    InvalidSpace,
    LpSpace,
    Space,
    SupportSet,
    Vector,
    ZeroAnchor,
    as_vector,
)

logger = structlog.get_logger()

# Slack of every axiom check
AXIOM_TOL = 1e-9


@dataclass(frozen=True)
class SipSelector:
    """Deterministic choice x -> f_x in J(x)."""

    name: str
    rule: Callable[[SupportSet], Functional]

    def select(
        self, space: Space, x: npt.ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES
    ) -> Functional:
        """The functional chosen at x/||x||.

        Raises:
            ZeroAnchor: If x is numerically zero
        """
        v = as_vector(x, space.dim)
        x_norm = space.norm(v)
        if x_norm <= tol.eps_zero:
            raise ZeroAnchor(x_norm)
        u = v / x_norm
        flip = _negative_canonical(u)
        f = self.rule(space.support_functionals(-u if flip else u, tol))
        return -f if flip else f


def _negative_canonical(u: Vector) -> bool:
    """True when the first non-negligible coordinate is negative.

    u and -u always get opposite answers, which makes every selector odd.
    """
    significant = np.flatnonzero(np.abs(u) > 1e-12)
    return bool(u[significant[0]] < 0) if len(significant) else False


def _barycenter(support: SupportSet) -> Functional:
    return support.barycenter()


def _extreme_rule(index: int) -> Callable[[SupportSet], Functional]:
    def rule(support: SupportSet) -> Functional:
        return support.extremes[min(index, support.size - 1)]

    return rule


BARYCENTER = SipSelector("barycenter", _barycenter)
LEXMIN = SipSelector("lexmin", _extreme_rule(0))


def extreme_selector(index: int) -> SipSelector:
    """Selector taking the index-th extreme (lexicographic order), clamped."""
    return SipSelector(f"extreme[{index}]", _extreme_rule(index))


def selector_family(max_extremes: int) -> list[SipSelector]:
    """Barycenter followed by one selector per extreme index."""
    return [BARYCENTER] + [extreme_selector(i) for i in range(max(max_extremes, 1))]


def sip_value(
    space: Space,
    selector: SipSelector,
    y: npt.ArrayLike,
    x: npt.ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """[y, x] = ||x|| f_{x/||x||}(y), and 0 when x = 0."""
    yv = as_vector(y, space.dim)
    xv = as_vector(x, space.dim)
    x_norm = space.norm(xv)
    if x_norm <= tol.eps_zero:
        return 0.0
    return x_norm * float(selector.select(space, xv, tol) @ yv)


def verify_sip_axioms(
    space: Space,
    selector: SipSelector = BARYCENTER,
    samples: int = 1000,
    seed: int = 0,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Decision:
    """Check linearity, positivity, Cauchy-Schwarz, homogeneity and compatibility.

    Returns fails with the first counterexample found.
    """
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")
    rng = np.random.default_rng(seed)

    def sip(a: Vector, b: Vector) -> float:
        return sip_value(space, selector, a, b, tol)

    for k in range(samples):
        scales = np.exp(rng.uniform(-2.0, 2.0, 3))[:, None]
        x, y, z = rng.standard_normal((3, space.dim)) * scales
        alpha, beta = rng.standard_normal(2) * 3.0
        nx, ny, nz = (space.norm(v) for v in (x, y, z))

        # (a) linear in the first slot
        lhs = sip(alpha * x + beta * y, z)
        rhs = alpha * sip(x, z) + beta * sip(y, z)
        if abs(lhs - rhs) > AXIOM_TOL * (abs(alpha) * nx + abs(beta) * ny) * nz:
            return _counterexample("additivity", k, x=x, y=y, z=z, alpha=alpha,
                                   beta=beta, lhs=lhs, rhs=rhs)

        # (b) positive definite, and compatible with the norm
        xx = sip(x, x)
        if not xx > 0:
            return _counterexample("positivity", k, x=x, value=xx)
        if abs(xx - nx**2) > AXIOM_TOL * nx**2:
            return _counterexample("compatibility", k, x=x, value=xx, norm=nx)

        # (c) Cauchy-Schwarz
        xy = sip(x, y)
        bound = sip(x, x) * sip(y, y)
        if xy**2 > bound * (1.0 + AXIOM_TOL):
            return _counterexample("cauchy_schwarz", k, x=x, y=y, value=xy, bound=bound)

        # (d) homogeneous in the second slot
        scaled = sip(x, alpha * y)
        if abs(scaled - alpha * xy) > AXIOM_TOL * abs(alpha) * nx * ny:
            return _counterexample("homogeneity", k, x=x, y=y, alpha=alpha,
                                   lhs=scaled, rhs=alpha * xy)

    logger.debug(
        "sip_axioms_verified", space=space.label, selector=selector.name, samples=samples
    )
    return Decision.holds(samples=samples, selector=selector.name, space=space.label)


def _counterexample(axiom: str, sample: int, **values: object) -> Decision:
    logger.warning("sip_axiom_violated", axiom=axiom, sample=sample)
    return Decision.fails(f"axiom {axiom} violated", axiom=axiom, sample=sample, **values)


def lp_semi_inner_product(p: float, y: npt.ArrayLike, x: npt.ArrayLike) -> float:
    """The unique s.i.p. of a smooth l_p: ||x||^(2-p) sum_i y_i sign(x_i)|x_i|^(p-1)."""
    yv = np.asarray(y, dtype=np.float64)
    xv = np.asarray(x, dtype=np.float64)
    x_norm = float(np.linalg.norm(xv, p))
    if x_norm == 0.0:
        return 0.0
    duality = np.sign(xv) * np.abs(xv) ** (p - 1.0)
    return x_norm ** (2.0 - p) * float(duality @ yv)


def smooth_selector_agreement(
    space: Space,
    selectors: Sequence[SipSelector],
    samples: int,
    seed: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Decision:
    """Every selector reproduces the closed-form s.i.p. of l_p on sampled pairs.

    Raises:
        InvalidSpace: If ``space`` is not a smooth l_p space
    """
    if not isinstance(space, LpSpace):
        raise InvalidSpace(f"Closed-form s.i.p. needs a smooth l_p space, got {space.label}")
    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {selector.name: 0.0 for selector in selectors}
    for _ in range(samples):
        x, y = rng.standard_normal((2, space.dim))
        expected = lp_semi_inner_product(space.p, y, x)
        scale = space.norm(x) * space.norm(y)
        for selector in selectors:
            difference = abs(sip_value(space, selector, y, x, tol) - expected) / scale
            worst[selector.name] = max(worst[selector.name], difference)
    largest = max(worst.values(), default=0.0)
    return Decision.from_bool(
        largest <= AXIOM_TOL, max_relative_difference=largest, per_selector=worst
    )
