"""Bilinear operators as coefficient tensors: evaluation, slices, norms and
norm-attainment sets.

The norm ||T|| = sup ||T(x, y)|| over the unit sphere of X x Y is computed
exactly when both X and Y are polyhedral: (x, y) -> ||T(x, y)|| is convex in
each argument separately, so its maximum over B_X x B_Y is attained at a pair
of extreme points. Otherwise the maximum is approached by multi-start
alternating ascent and the result is a certified lower bound.
"""

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np
import numpy.typing as npt
import structlog

from bilinorm.config import DEFAULT_TOLERANCES, Tolerances
from bilinorm.metrics import ascent_iterations, ascent_starts_total
from bilinorm.spaces import (
    InvalidSpace,
    LinfSpace,
    LpSpace,
    Space,
    SpaceError,
    Vector,
    as_vector,
    sample_sphere,
)

logger = structlog.get_logger()

DEFAULT_STARTS = 64
# Ascent stops once neither coordinate moves by more than this
STEP_TOL = 1e-13
MAX_ITERATIONS = 5000
# Distinct maximisers closer than this are the same point
ORBIT_TOL = 1e-6
# Looser merge for ascent endpoints, which stop short of the exact maximiser
ASCENT_ORBIT_TOL = 1e-4


class ZeroOperator(SpaceError):
    """Raised when an operation needs a non-zero operator."""

    def __init__(self, norm: float):
        super().__init__(f"Operator norm {norm:g} is numerically zero")
        self.norm = norm


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """A linear map domain -> codomain; matrix has shape (codomain.dim, domain.dim)."""

    domain: Space
    codomain: Space
    matrix: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        expected = (self.codomain.dim, self.domain.dim)
        if self.matrix.shape != expected:
            raise InvalidSpace(
                f"Matrix shape {self.matrix.shape} does not match spaces {expected}"
            )

    def apply(self, x: npt.ArrayLike) -> Vector:
        return self.matrix @ as_vector(x, self.domain.dim)


@dataclass(frozen=True, eq=False)
class BilinearOperator:
    """T(e_i, f_j) = sum_l coeffs[i, j, l] g_l in the standard bases."""

    X: Space
    Y: Space
    Z: Space
    coeffs: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        expected = (self.X.dim, self.Y.dim, self.Z.dim)
        if self.coeffs.shape != expected:
            raise InvalidSpace(
                f"Coefficient shape {self.coeffs.shape} does not match spaces {expected}"
            )
        if not np.all(np.isfinite(self.coeffs)):
            raise InvalidSpace("Coefficients must be finite")
        if self.X.dim < 2 or self.Y.dim < 2:
            raise InvalidSpace("Domain spaces must have dimension at least 2")

    @classmethod
    def from_coeffs(
        cls, X: Space, Y: Space, Z: Space, coeffs: npt.ArrayLike
    ) -> "BilinearOperator":
        return cls(X, Y, Z, np.array(coeffs, dtype=np.float64))

    def scaled(self, alpha: float) -> "BilinearOperator":
        return BilinearOperator(self.X, self.Y, self.Z, alpha * self.coeffs)

    def plus(self, other: "BilinearOperator", alpha: float = 1.0) -> "BilinearOperator":
        """T + alpha * other."""
        return BilinearOperator(
            self.X, self.Y, self.Z, self.coeffs + alpha * other.coeffs
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "X": self.X.to_dict(),
            "Y": self.Y.to_dict(),
            "Z": self.Z.to_dict(),
            "coeffs": self.coeffs.tolist(),
        }


@dataclass(frozen=True)
class LinearNorm:
    """||A|| with the unit vectors found to attain it."""

    value: float
    maximizers: list[Vector]
    exact: bool
    # Ascent starts that ended at each maximiser
    support: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class BilinearNorm:
    """||T|| with the pairs (x, y) found within eps_attain of it."""

    value: float
    certificate: list[tuple[Vector, Vector]]
    exact: bool
    starts: int = 0
    # Number of ascent starts that ended within eps_attain of the value
    support: int = 0
    # Starts behind each certificate pair; empty means one each
    weights: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class NormAttainmentSet:
    """Sign-orbit representatives of M_T."""

    value: float
    orbits: list[tuple[Vector, Vector]]
    exact: bool
    starts: int = 0
    orbit_support: list[int] = field(default_factory=list)

    @property
    def is_single_orbit(self) -> bool:
        return len(self.orbits) == 1

    @property
    def single_orbit_certified(self) -> bool:
        """One orbit, found exhaustively or reached by at least half the starts.

        On the exhaustive path a single extreme orbit is all of M_T: a
        maximiser inside a face would force two distinct extreme maximisers.
        """
        if not self.is_single_orbit:
            return False
        if self.exact:
            return True
        return bool(self.orbit_support) and 2 * self.orbit_support[0] >= self.starts

    def signed_members(self) -> list[tuple[Vector, Vector]]:
        """Every orbit expanded to its four members (+-x, +-y)."""
        return [
            (sx * x, sy * y)
            for x, y in self.orbits
            for sx, sy in itertools.product((1.0, -1.0), repeat=2)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "exact": self.exact,
            "orbits": [[x.tolist(), y.tolist()] for x, y in self.orbits],
            "single_orbit_certified": self.single_orbit_certified,
        }


def evaluate(T: BilinearOperator, x: npt.ArrayLike, y: npt.ArrayLike) -> Vector:
    """z_l = sum_ij c[i, j, l] x_i y_j."""
    xv = as_vector(x, T.X.dim)
    yv = as_vector(y, T.Y.dim)
    return np.einsum("ijl,i,j->l", T.coeffs, xv, yv)


def fix_first(T: BilinearOperator, x0: npt.ArrayLike) -> LinearOperator:
    """The slice y -> T(x0, y)."""
    xv = as_vector(x0, T.X.dim)
    return LinearOperator(T.Y, T.Z, np.einsum("ijl,i->lj", T.coeffs, xv))


def fix_second(T: BilinearOperator, y0: npt.ArrayLike) -> LinearOperator:
    """The slice x -> T(x, y0)."""
    yv = as_vector(y0, T.Y.dim)
    return LinearOperator(T.X, T.Z, np.einsum("ijl,j->li", T.coeffs, yv))


def linear_norm(
    A: LinearOperator,
    tol: Tolerances = DEFAULT_TOLERANCES,
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
) -> LinearNorm:
    """sup ||A x|| over the unit sphere of the domain.

    Exact over the extreme points of a polyhedral domain; otherwise the best
    of ``starts`` seeded supporting-functional ascents.
    """
    if A.domain.is_polyhedral:
        points = A.domain.extreme_points()
        values = A.codomain.norms(points @ A.matrix.T)
        value = float(values.max())
        keep = values >= _attain_threshold(value, tol)
        maximizers = list(points[keep])
        return LinearNorm(value, maximizers, exact=True, support=[1] * len(maximizers))

    ascent_starts_total.labels(method="linear").inc(starts)
    runs = []
    for x in sample_sphere(A.domain, starts, seed):
        x, value, iterations = _linear_ascent(A, x, tol)
        ascent_iterations.observe(iterations)
        runs.append((value, x))
    value = max(v for v, _ in runs)
    threshold = _attain_threshold(value, tol)
    maximizers, support = _count_points(
        [_canonical(x) for v, x in _sorted_runs(runs) if v >= threshold]
    )
    return LinearNorm(value, maximizers, exact=False, support=support)


def _linear_ascent(
    A: LinearOperator, x: Vector, tol: Tolerances
) -> tuple[Vector, float, int]:
    """Monotone ascent: each step maximises a supporting functional of A x over the ball."""
    value = A.codomain.norm(A.matrix @ x)
    iterations = 0
    for iterations in range(1, MAX_ITERATIONS + 1):
        if value <= tol.eps_zero:
            break
        f = A.codomain.support_functionals(A.matrix @ x, tol).barycenter()
        x_new = A.domain.maximizing_vector(A.matrix.T @ f)
        value_new = A.codomain.norm(A.matrix @ x_new)
        if value_new < value:
            break
        step = float(np.max(np.abs(x_new - x)))
        x, value = x_new, value_new
        if step <= STEP_TOL:
            break
    return x, value, iterations


def bilinear_norm(
    T: BilinearOperator,
    tol: Tolerances = DEFAULT_TOLERANCES,
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
    workers: int = 1,
    force_ascent: bool = False,
) -> BilinearNorm:
    """||T|| with a certificate of attaining pairs.

    ``force_ascent`` skips the exact polyhedral paths.
    """
    if force_ascent:
        result = _bilinear_norm_alternating(T, tol, starts, seed, workers)
    elif T.X.is_polyhedral and T.Y.is_polyhedral:
        result = _bilinear_norm_exhaustive(T, tol)
    elif T.X.is_polyhedral:
        result = _bilinear_norm_sliced(T, tol, starts, seed, fix_first_side=True)
    elif T.Y.is_polyhedral:
        result = _bilinear_norm_sliced(T, tol, starts, seed, fix_first_side=False)
    else:
        result = _bilinear_norm_alternating(T, tol, starts, seed, workers)
    logger.debug(
        "bilinear_norm_computed",
        value=result.value,
        exact=result.exact,
        certificate=len(result.certificate),
    )
    return result


def _bilinear_norm_exhaustive(T: BilinearOperator, tol: Tolerances) -> BilinearNorm:
    U = T.X.extreme_points()
    V = T.Y.extreme_points()
    images = np.einsum("ijl,ai,bj->abl", T.coeffs, U, V)
    values = T.Z.norms(images)
    value = float(values.max())
    threshold = _attain_threshold(value, tol)
    certificate = [
        (U[a], V[b]) for a, b in zip(*np.nonzero(values >= threshold))
    ]
    return BilinearNorm(value, certificate, exact=True)


def _bilinear_norm_sliced(
    T: BilinearOperator,
    tol: Tolerances,
    starts: int,
    seed: int,
    fix_first_side: bool,
) -> BilinearNorm:
    """Exact over the polyhedral factor, ascent over the other one.

    Every slice that reaches the value contributes all of its ascent starts
    to ``starts``; each certificate pair is weighted by the starts of its
    slice that ended there.
    """
    polyhedral = T.X if fix_first_side else T.Y
    slices = []
    for u in polyhedral.extreme_points():
        operator = fix_first(T, u) if fix_first_side else fix_second(T, u)
        slices.append((u, linear_norm(operator, tol, starts, seed)))
    value = max(s.value for _, s in slices)
    threshold = _attain_threshold(value, tol)

    certificate: list[tuple[Vector, Vector]] = []
    weights: list[int] = []
    attaining_starts = 0
    for u, s in slices:
        if s.value < threshold:
            continue
        attaining_starts += sum(s.support) if s.exact else starts
        for v, count in zip(s.maximizers, s.support):
            certificate.append((u, v) if fix_first_side else (v, u))
            weights.append(count)
    return BilinearNorm(value, certificate, exact=False, starts=attaining_starts,
                        support=sum(weights), weights=weights)


def _bilinear_norm_alternating(
    T: BilinearOperator,
    tol: Tolerances,
    starts: int,
    seed: int,
    workers: int,
) -> BilinearNorm:
    x_seed, y_seed = (int(s) for s in np.random.SeedSequence(seed).generate_state(2))
    xs = sample_sphere(T.X, starts, x_seed)
    ys = sample_sphere(T.Y, starts, y_seed)
    ascent_starts_total.labels(method="alternating").inc(starts)

    def run(k: int) -> tuple[float, Vector, Vector]:
        x, y, value, iterations = _alternating_ascent(T, xs[k], ys[k], tol)
        ascent_iterations.observe(iterations)
        return value, x, y

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(run, range(starts)))
    else:
        runs = [run(k) for k in range(starts)]

    # Deterministic merge: value descending, then coordinates.
    runs.sort(key=lambda r: (-r[0], tuple(r[1].tolist()), tuple(r[2].tolist())))
    value = runs[0][0]
    threshold = _attain_threshold(value, tol)
    certificate = [(x, y) for v, x, y in runs if v >= threshold]
    return BilinearNorm(value, certificate, exact=False, starts=starts,
                        support=len(certificate))


def _alternating_ascent(
    T: BilinearOperator, x: Vector, y: Vector, tol: Tolerances
) -> tuple[Vector, Vector, float, int]:
    """Alternate exact supporting-functional steps in y and in x.

    Each half step maximises f(T(x, .)) or f(T(., y)) over the ball for a
    supporting functional f of the current image, so ||T(x, y)|| never
    decreases.
    """
    value = T.Z.norm(evaluate(T, x, y))
    iterations = 0
    for iterations in range(1, MAX_ITERATIONS + 1):
        if value <= tol.eps_zero:
            break
        f = T.Z.support_functionals(evaluate(T, x, y), tol).barycenter()
        y_new = T.Y.maximizing_vector(np.einsum("ijl,i,l->j", T.coeffs, x, f))
        f = T.Z.support_functionals(evaluate(T, x, y_new), tol).barycenter()
        x_new = T.X.maximizing_vector(np.einsum("ijl,j,l->i", T.coeffs, y_new, f))
        value_new = T.Z.norm(evaluate(T, x_new, y_new))
        if value_new < value:
            break
        step = float(max(np.max(np.abs(x_new - x)), np.max(np.abs(y_new - y))))
        x, y, value = x_new, y_new, value_new
        if step <= STEP_TOL:
            break
    return x, y, value, iterations


def norm_attainment_set(
    T: BilinearOperator,
    tol: Tolerances = DEFAULT_TOLERANCES,
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
    workers: int = 1,
    norm: Optional[BilinearNorm] = None,
) -> NormAttainmentSet:
    """Sign orbits of the maximising pairs.

    Raises:
        ZeroOperator: If ||T|| is numerically zero (M_T would be the whole sphere)
    """
    norm = norm or bilinear_norm(T, tol, starts, seed, workers)
    if norm.value <= tol.eps_zero:
        raise ZeroOperator(norm.value)

    orbits: list[tuple[Vector, Vector]] = []
    support: list[int] = []
    merge = ORBIT_TOL if norm.exact else ASCENT_ORBIT_TOL
    weights = norm.weights or [1] * len(norm.certificate)
    for (x, y), weight in zip(norm.certificate, weights):
        # Maximisers have both coordinates on the unit spheres.
        x = x / T.X.norm(x)
        y = y / T.Y.norm(y)
        pair = (_canonical(x), _canonical(y))
        for k, (ox, oy) in enumerate(orbits):
            if _close(pair[0], ox, merge) and _close(pair[1], oy, merge):
                support[k] += weight
                break
        else:
            orbits.append(pair)
            support.append(weight)

    order = sorted(
        range(len(orbits)),
        key=lambda k: (-support[k], tuple(orbits[k][0].tolist()),
                       tuple(orbits[k][1].tolist())),
    )
    return NormAttainmentSet(
        value=norm.value,
        orbits=[orbits[k] for k in order],
        exact=norm.exact,
        starts=norm.starts,
        orbit_support=[support[k] for k in order],
    )


def _attain_threshold(value: float, tol: Tolerances) -> float:
    return value - tol.eps_attain * value


def _canonical(v: Vector) -> Vector:
    """Representative of {v, -v}: first significant coordinate positive."""
    significant = np.flatnonzero(np.abs(v) > ORBIT_TOL)
    if len(significant) and v[significant[0]] < 0:
        return -v
    return v


def _close(a: Vector, b: Vector, eps: float = ORBIT_TOL) -> bool:
    return bool(np.max(np.abs(a - b)) <= eps)


def _sorted_runs(runs: list[tuple[float, Vector]]) -> list[tuple[float, Vector]]:
    return sorted(runs, key=lambda r: (-r[0], tuple(r[1].tolist())))


def _count_points(points: Sequence[Vector]) -> tuple[list[Vector], list[int]]:
    """Distinct points in order of first appearance, with their multiplicities."""
    kept: list[Vector] = []
    counts: list[int] = []
    for p in points:
        for k, q in enumerate(kept):
            if _close(p, q):
                counts[k] += 1
                break
        else:
            kept.append(p)
            counts.append(1)
    return kept, counts


def random_operator(
    X: Space, Y: Space, Z: Space, rng: np.random.Generator
) -> BilinearOperator:
    """Standard-normal coefficient tensor."""
    return BilinearOperator(X, Y, Z, rng.standard_normal((X.dim, Y.dim, Z.dim)))


def _smooth_example() -> BilinearOperator:
    # T((1,1),(1,1)) = (1,0) and T vanishes on the other three pairs of the
    # basis {(1,1),(1,-1)}, so T(x, y) = ((x1 + x2)(y1 + y2)/4, 0).
    coeffs = np.zeros((2, 2, 2))
    coeffs[:, :, 0] = 0.25
    return BilinearOperator(LinfSpace(2), LinfSpace(2), LinfSpace(2), coeffs)


def _coordinate_product() -> BilinearOperator:
    # T(x, y) = (x1 y1, x2 y2) on l_inf^2
    coeffs = np.zeros((2, 2, 2))
    coeffs[0, 0, 0] = 1.0
    coeffs[1, 1, 1] = 1.0
    return BilinearOperator(LinfSpace(2), LinfSpace(2), LinfSpace(2), coeffs)


def _first_coordinates() -> BilinearOperator:
    # Scalar-valued T(x, y) = x1 y1 on l_2^2
    coeffs = np.zeros((2, 2, 1))
    coeffs[0, 0, 0] = 1.0
    return BilinearOperator(LpSpace(2.0, 2), LpSpace(2.0, 2), LpSpace(2.0, 1), coeffs)


BUILTIN_OPERATORS: dict[str, Callable[[], BilinearOperator]] = {
    "smooth-example": _smooth_example,
    "coordinate-product": _coordinate_product,
    "first-coordinates": _first_coordinates,
    # Historical name of smooth-example
    "paper-example": _smooth_example,
}


def builtin_operator(name: str) -> BilinearOperator:
    """A named operator; raises KeyError for unknown names."""
    try:
        return BUILTIN_OPERATORS[name]()
    except KeyError:
        raise KeyError(
            f"Unknown builtin operator '{name}'. Known: {sorted(BUILTIN_OPERATORS)}"
        ) from None
