"""Finite-dimensional real normed spaces.

Each space knows its norm, its dual norm, the extreme points of the set of
supporting functionals at a point, and (for polyhedral norms) the extreme
points of its unit ball. Spaces are immutable values; every operation is a
pure function of its inputs.
"""

import itertools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterable, Sequence, Union

import numpy as np
import numpy.typing as npt
import structlog
from scipy.optimize import nnls

from bilinorm.config import DEFAULT_TOLERANCES, Tolerances
from bilinorm.decision import Decision

logger = structlog.get_logger()

Vector = npt.NDArray[np.float64]
Functional = npt.NDArray[np.float64]

# l1 support sets grow as 2^zeros
MAX_FREE_SIGNS = 20


class SpaceError(ValueError):
    """Base exception for invalid geometric input."""

    pass


class InvalidSpace(SpaceError):
    """Raised when a space descriptor violates its invariants."""

    pass


class DimensionMismatch(SpaceError):
    """Raised when a vector or functional has the wrong length."""

    def __init__(self, expected: int, got: int, what: str = "vector"):
        super().__init__(f"Expected {what} of dimension {expected}, got {got}")
        self.expected = expected
        self.got = got


class ZeroAnchor(SpaceError):
    """Raised when an operation needs a non-zero anchor point."""

    def __init__(self, norm: float):
        super().__init__(f"Anchor has norm {norm:g}; a non-zero point is required")
        self.norm = norm


class NotPolyhedral(SpaceError):
    """Raised when ball extreme points are requested for a curved ball."""

    pass


class SupportSetTooLarge(SpaceError):
    """Raised when an l1 support set would need more than 2^20 extreme points."""

    def __init__(self, free_signs: int):
        super().__init__(
            f"{free_signs} zero coordinates exceed the limit of {MAX_FREE_SIGNS}"
        )
        self.free_signs = free_signs


def as_vector(coords: Union[Sequence[float], npt.ArrayLike], dim: int | None = None,
              what: str = "vector") -> Vector:
    """Validate coordinates and return them as a float array.

    Raises:
        DimensionMismatch: If ``dim`` is given and the length differs
        SpaceError: If the coordinates are not a finite 1-D list
    """
    v = np.asarray(coords, dtype=np.float64)
    if v.ndim != 1:
        raise SpaceError(f"A {what} must be one-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise SpaceError(f"A {what} must have finite entries")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(dim, v.shape[0], what)
    return v


def dedupe_rows(rows: Iterable[Vector], eps: float) -> list[Vector]:
    """Drop rows within ``eps`` (max-norm) of an earlier row, sorted lexicographically."""
    kept: list[Vector] = []
    for row in sorted(rows, key=lambda r: tuple(r.tolist())):
        if all(np.max(np.abs(row - k)) > eps for k in kept):
            kept.append(row)
    return kept


@dataclass(frozen=True)
class SupportSet:
    """Extreme points of J(x), the norm-one functionals attaining at ``anchor``."""

    anchor: Vector
    extremes: tuple[Functional, ...]

    def __post_init__(self) -> None:
        if not self.extremes:
            raise SpaceError("A support set needs at least one functional")

    @property
    def size(self) -> int:
        return len(self.extremes)

    @property
    def is_singleton(self) -> bool:
        return len(self.extremes) == 1

    @property
    def matrix(self) -> npt.NDArray[np.float64]:
        """Extremes stacked as rows."""
        return np.vstack(self.extremes)

    def barycenter(self) -> Functional:
        return np.mean(self.matrix, axis=0)

    def pairings(self, y: Vector) -> npt.NDArray[np.float64]:
        """Values f(y) for every extreme f."""
        return self.matrix @ y


class Space(ABC):
    """A finite-dimensional real normed space with coordinates in R^dim."""

    kind: str = "abstract"

    @property
    @abstractmethod
    def dim(self) -> int: ...

    @property
    def is_polyhedral(self) -> bool:
        """Whether the unit ball is a polytope."""
        return False

    @property
    def is_smooth(self) -> bool:
        """Whether every non-zero point has a unique supporting functional."""
        return False

    @abstractmethod
    def norms(self, points: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Norms along the last axis of ``points``."""

    @abstractmethod
    def dual_norms(self, functionals: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Dual norms along the last axis of ``functionals``."""

    @abstractmethod
    def _support_extremes(
        self, x: Vector, x_norm: float, tol: Tolerances
    ) -> list[Functional]:
        """Extreme points of J(x) for a non-zero ``x``."""

    @abstractmethod
    def maximizing_vector(self, g: Functional) -> Vector:
        """A unit vector v with g(v) equal to the dual norm of g."""

    @abstractmethod
    def to_dict(self) -> dict[str, Any]:
        """JSON descriptor of the space."""

    def extreme_points(self) -> npt.NDArray[np.float64]:
        """Extreme points of the unit ball, one per row."""
        raise NotPolyhedral(f"The unit ball of {self.label} is not a polytope")

    @property
    def label(self) -> str:
        return f"{self.kind}^{self.dim}"

    def norm(self, x: npt.ArrayLike) -> float:
        return float(self.norms(as_vector(x, self.dim)))

    def dual_norm(self, f: npt.ArrayLike) -> float:
        return float(self.dual_norms(as_vector(f, self.dim, "functional")))

    def support_functionals(
        self, x: npt.ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES
    ) -> SupportSet:
        """Extreme supporting functionals at ``x``.

        Raises:
            ZeroAnchor: If ``x`` is numerically zero
        """
        v = as_vector(x, self.dim)
        x_norm = self.norm(v)
        if x_norm <= tol.eps_zero:
            raise ZeroAnchor(x_norm)
        extremes = dedupe_rows(self._support_extremes(v, x_norm, tol), tol.eps_eq)
        return SupportSet(anchor=v, extremes=tuple(extremes))


@dataclass(frozen=True)
class LpSpace(Space):
    """l_p^dim with 1 < p < infinity; smooth and strictly convex."""

    p: float
    n: int
    kind = "lp"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidSpace(f"Dimension must be positive, got {self.n}")
        if not (1.0 < self.p < math.inf):
            raise InvalidSpace(f"LpSpace needs 1 < p < inf, got {self.p}")

    @property
    def dim(self) -> int:
        return self.n

    @property
    def q(self) -> float:
        """Conjugate exponent."""
        return self.p / (self.p - 1.0)

    @property
    def is_smooth(self) -> bool:
        return True

    @property
    def label(self) -> str:
        return f"l{self.p:g}^{self.n}"

    def norms(self, points: npt.ArrayLike) -> npt.NDArray[np.float64]:
        return _lp_norms(np.asarray(points, dtype=np.float64), self.p)

    def dual_norms(self, functionals: npt.ArrayLike) -> npt.NDArray[np.float64]:
        return _lp_norms(np.asarray(functionals, dtype=np.float64), self.q)

    def _support_extremes(
        self, x: Vector, x_norm: float, tol: Tolerances
    ) -> list[Functional]:
        u = x / x_norm
        return [np.sign(u) * np.abs(u) ** (self.p - 1.0)]

    def maximizing_vector(self, g: Functional) -> Vector:
        g_norm = float(self.dual_norms(g))
        if g_norm == 0.0:
            return _first_basis_vector(self.n)
        u = g / g_norm
        return np.sign(u) * np.abs(u) ** (self.q - 1.0)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "lp", "p": self.p, "dim": self.n}


@dataclass(frozen=True)
class L1Space(Space):
    """l_1^dim; the unit ball is the cross-polytope."""

    n: int
    kind = "l1"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidSpace(f"Dimension must be positive, got {self.n}")

    @property
    def dim(self) -> int:
        return self.n

    @property
    def is_polyhedral(self) -> bool:
        return True

    @property
    def label(self) -> str:
        return f"l1^{self.n}"

    def norms(self, points: npt.ArrayLike) -> npt.NDArray[np.float64]:
        return np.sum(np.abs(np.asarray(points, dtype=np.float64)), axis=-1)

    def dual_norms(self, functionals: npt.ArrayLike) -> npt.NDArray[np.float64]:
        return np.max(np.abs(np.asarray(functionals, dtype=np.float64)), axis=-1)

    def _support_extremes(
        self, x: Vector, x_norm: float, tol: Tolerances
    ) -> list[Functional]:
        free = np.flatnonzero(np.abs(x) <= tol.eps_eq * x_norm)
        if len(free) > MAX_FREE_SIGNS:
            raise SupportSetTooLarge(len(free))
        base = np.sign(x)
        extremes = []
        for signs in itertools.product((-1.0, 1.0), repeat=len(free)):
            f = base.copy()
            f[free] = signs
            extremes.append(f)
        return extremes

    def maximizing_vector(self, g: Functional) -> Vector:
        i = int(np.argmax(np.abs(g)))
        v = np.zeros(self.n)
        v[i] = 1.0 if g[i] >= 0 else -1.0
        return v

    def extreme_points(self) -> npt.NDArray[np.float64]:
        eye = np.eye(self.n)
        return np.vstack([eye, -eye])

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "lp", "p": 1.0, "dim": self.n}


@dataclass(frozen=True)
class LinfSpace(Space):
    """l_infinity^dim; the unit ball is the cube."""

    n: int
    kind = "linf"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidSpace(f"Dimension must be positive, got {self.n}")

    @property
    def dim(self) -> int:
        return self.n

    @property
    def is_polyhedral(self) -> bool:
        return True

    @property
    def label(self) -> str:
        return f"linf^{self.n}"

    def norms(self, points: npt.ArrayLike) -> npt.NDArray[np.float64]:
        return np.max(np.abs(np.asarray(points, dtype=np.float64)), axis=-1)

    def dual_norms(self, functionals: npt.ArrayLike) -> npt.NDArray[np.float64]:
        return np.sum(np.abs(np.asarray(functionals, dtype=np.float64)), axis=-1)

    def _support_extremes(
        self, x: Vector, x_norm: float, tol: Tolerances
    ) -> list[Functional]:
        extremes = []
        for i in np.flatnonzero(np.abs(x) >= (1.0 - tol.eps_eq) * x_norm):
            f = np.zeros(self.n)
            f[i] = np.sign(x[i])
            extremes.append(f)
        return extremes

    def maximizing_vector(self, g: Functional) -> Vector:
        return np.where(g >= 0, 1.0, -1.0)

    def extreme_points(self) -> npt.NDArray[np.float64]:
        return np.array(list(itertools.product((1.0, -1.0), repeat=self.n)))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "lp", "p": "inf", "dim": self.n}


@dataclass(frozen=True)
class PolyhedralSpace(Space):
    """Norm ||x|| = max_g |g(x)| over a finite set of facet functionals.

    The facet list is closed under negation at construction and must span the
    dual space, so the induced function is a genuine norm.
    """

    facets: tuple[tuple[float, ...], ...]
    kind = "polyhedral"

    def __post_init__(self) -> None:
        if not self.facets:
            raise InvalidSpace("A polyhedral norm needs at least one facet")
        rows = np.array(self.facets, dtype=np.float64)
        if rows.ndim != 2 or not np.all(np.isfinite(rows)):
            raise InvalidSpace("Facets must be equal-length lists of finite reals")
        closed = dedupe_rows(list(rows) + list(-rows), 0.0)
        object.__setattr__(self, "facets", tuple(tuple(r.tolist()) for r in closed))
        if np.linalg.matrix_rank(rows) < rows.shape[1]:
            raise InvalidSpace("Facets must span the dual space")

    @classmethod
    def from_facets(cls, facets: npt.ArrayLike) -> "PolyhedralSpace":
        """Build from any facet list, adding the negations."""
        rows = np.atleast_2d(np.asarray(facets, dtype=np.float64))
        return cls(tuple(tuple(r.tolist()) for r in rows))

    @classmethod
    def cube(cls, dim: int) -> "PolyhedralSpace":
        """Facets of the l_infinity ball."""
        return cls.from_facets(np.eye(dim))

    @classmethod
    def cross_polytope(cls, dim: int) -> "PolyhedralSpace":
        """Facets of the l_1 ball."""
        return cls.from_facets(list(itertools.product((1.0, -1.0), repeat=dim)))

    @cached_property
    def facet_matrix(self) -> npt.NDArray[np.float64]:
        return np.array(self.facets, dtype=np.float64)

    @property
    def dim(self) -> int:
        return len(self.facets[0])

    @property
    def is_polyhedral(self) -> bool:
        return True

    def norms(self, points: npt.ArrayLike) -> npt.NDArray[np.float64]:
        pts = np.asarray(points, dtype=np.float64)
        return np.max(pts @ self.facet_matrix.T, axis=-1)

    def dual_norms(self, functionals: npt.ArrayLike) -> npt.NDArray[np.float64]:
        fs = np.asarray(functionals, dtype=np.float64)
        return np.max(fs @ self.vertices.T, axis=-1)

    def _support_extremes(
        self, x: Vector, x_norm: float, tol: Tolerances
    ) -> list[Functional]:
        values = self.facet_matrix @ x
        active = self.facet_matrix[values >= (1.0 - tol.eps_eq) * x_norm]
        active = np.array(dedupe_rows(list(active), tol.eps_eq))
        return [
            active[i]
            for i in range(len(active))
            if not _in_convex_hull(active[i], np.delete(active, i, axis=0), tol)
        ]

    def maximizing_vector(self, g: Functional) -> Vector:
        return self.vertices[int(np.argmax(self.vertices @ g))]

    def extreme_points(self) -> npt.NDArray[np.float64]:
        return self.vertices

    @cached_property
    def vertices(self) -> npt.NDArray[np.float64]:
        """Vertices of {x : g(x) <= 1 for all facets g}.

        Each vertex is the unique solution of dim linearly independent active
        facet equations that satisfies every other facet inequality.
        """
        rows = self.facet_matrix
        n = self.dim
        found: list[Vector] = []
        for subset in itertools.combinations(range(len(rows)), n):
            system = rows[list(subset)]
            if abs(np.linalg.det(system)) < 1e-12:
                continue
            v = np.linalg.solve(system, np.ones(n))
            if np.all(rows @ v <= 1.0 + 1e-9):
                found.append(v)
        vertices = dedupe_rows(found, 1e-9)
        logger.debug("polyhedral_vertices_enumerated", count=len(vertices), dim=n)
        return np.array(vertices)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "polyhedral", "facets": [list(f) for f in self.facets]}


def lp_space(p: Union[float, str], dim: int) -> Space:
    """The l_p^dim space, dispatching p = 1 and p = inf to their own kinds."""
    if isinstance(p, str):
        if p.lower() not in ("inf", "infinity"):
            p = float(p)
        else:
            p = math.inf
    if p == math.inf:
        return LinfSpace(dim)
    if p == 1.0:
        return L1Space(dim)
    if p < 1.0:
        raise InvalidSpace(f"p must be at least 1, got {p}")
    return LpSpace(float(p), dim)


def norm(space: Space, x: npt.ArrayLike) -> float:
    return space.norm(x)


def dual_norm(space: Space, f: npt.ArrayLike) -> float:
    return space.dual_norm(f)


def support_functionals(
    space: Space, x: npt.ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES
) -> SupportSet:
    return space.support_functionals(x, tol)


def is_smooth_point(
    space: Space, x: npt.ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES
) -> Decision:
    """Smooth iff J(x) has a single extreme point."""
    support = space.support_functionals(x, tol)
    return Decision.from_bool(
        support.is_singleton,
        extremes=[f.tolist() for f in support.extremes],
    )


def extreme_points_ball(space: Space) -> npt.NDArray[np.float64]:
    return space.extreme_points()


def sample_sphere(space: Space, count: int, seed: int) -> npt.NDArray[np.float64]:
    """Seeded unit vectors: Gaussian directions normalised by the space's norm."""
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((count, space.dim))
    return directions / space.norms(directions)[:, None]


def _lp_norms(points: npt.NDArray[np.float64], p: float) -> npt.NDArray[np.float64]:
    # Scale by the max entry so large p cannot overflow.
    scale = np.max(np.abs(points), axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    return np.squeeze(safe, axis=-1) * np.sum(np.abs(points / safe) ** p, axis=-1) ** (
        1.0 / p
    )


def _first_basis_vector(dim: int) -> Vector:
    v = np.zeros(dim)
    v[0] = 1.0
    return v


def _in_convex_hull(
    point: Vector, others: npt.NDArray[np.float64], tol: Tolerances
) -> bool:
    """Whether ``point`` is a convex combination of the rows of ``others``."""
    if len(others) == 0:
        return False
    # Solve [others^T; 1] w = [point; 1] with w >= 0.
    system = np.vstack([others.T, np.ones(len(others))])
    target = np.append(point, 1.0)
    _, residual = nnls(system, target)
    return bool(residual <= tol.eps_eq)
