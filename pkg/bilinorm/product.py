"""The product X x Y under the max norm ||(x, y)|| = max(||x||, ||y||).

`ProductSpace` plugs into the generic machinery of `spaces` and
`orthogonality`. The closed-form descriptions of the parts, of the
orthogonality set and of the smooth points of the sphere are implemented
separately on the factors, so both routes can be checked against each other.
"""

import itertools
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt

from bilinorm.config import DEFAULT_TOLERANCES, Tolerances
from bilinorm.decision import Decision, all_of, any_of
from bilinorm.orthogonality import in_negative_part, in_positive_part, is_bj_orthogonal
from bilinorm.spaces import (
    Functional,
    Space,
    SpaceError,
    Vector,
    ZeroAnchor,
    as_vector,
    is_smooth_point,
)


class NotOnUnitSphere(SpaceError):
    """Raised when a point expected on the unit sphere is not."""

    def __init__(self, norm: float):
        super().__init__(f"Point has norm {norm!r}, expected 1")
        self.norm = norm


@dataclass(frozen=True)
class ProductVector:
    """A pair (x, y) with x in X and y in Y."""

    x: Vector
    y: Vector

    @classmethod
    def of(cls, x: npt.ArrayLike, y: npt.ArrayLike) -> "ProductVector":
        return cls(as_vector(x), as_vector(y))

    def joined(self) -> Vector:
        return np.concatenate([self.x, self.y])

    def __add__(self, other: "ProductVector") -> "ProductVector":
        return ProductVector(self.x + other.x, self.y + other.y)

    def scaled(self, alpha: float) -> "ProductVector":
        return ProductVector(alpha * self.x, alpha * self.y)


@dataclass(frozen=True)
class ProductSpace(Space):
    """X x Y with the max norm; coordinates are x followed by y."""

    left: Space
    right: Space
    kind = "product"

    @property
    def dim(self) -> int:
        return self.left.dim + self.right.dim

    @property
    def is_polyhedral(self) -> bool:
        return self.left.is_polyhedral and self.right.is_polyhedral

    @property
    def label(self) -> str:
        return f"({self.left.label} x {self.right.label})"

    def split(self, v: npt.ArrayLike) -> ProductVector:
        w = as_vector(v, self.dim)
        return ProductVector(w[: self.left.dim], w[self.left.dim :])

    def join(self, x: npt.ArrayLike, y: npt.ArrayLike) -> Vector:
        return np.concatenate(
            [as_vector(x, self.left.dim), as_vector(y, self.right.dim)]
        )

    def norms(self, points: npt.ArrayLike) -> npt.NDArray[np.float64]:
        pts = np.asarray(points, dtype=np.float64)
        k = self.left.dim
        return np.maximum(
            self.left.norms(pts[..., :k]), self.right.norms(pts[..., k:])
        )

    def dual_norms(self, functionals: npt.ArrayLike) -> npt.NDArray[np.float64]:
        fs = np.asarray(functionals, dtype=np.float64)
        k = self.left.dim
        return self.left.dual_norms(fs[..., :k]) + self.right.dual_norms(fs[..., k:])

    def _support_extremes(
        self, v: Vector, v_norm: float, tol: Tolerances
    ) -> list[Functional]:
        # Dual-sum rule: the dominant factor supports; both do on a tie.
        pair = self.split(v)
        gap = (self.left.norm(pair.x) - self.right.norm(pair.y)) / v_norm
        extremes: list[Functional] = []
        if gap >= -tol.eps_eq:
            for f in self.left.support_functionals(pair.x, tol).extremes:
                extremes.append(np.concatenate([f, np.zeros(self.right.dim)]))
        if gap <= tol.eps_eq:
            for g in self.right.support_functionals(pair.y, tol).extremes:
                extremes.append(np.concatenate([np.zeros(self.left.dim), g]))
        return extremes

    def maximizing_vector(self, g: Functional) -> Vector:
        k = self.left.dim
        return np.concatenate(
            [
                self.left.maximizing_vector(g[:k]),
                self.right.maximizing_vector(g[k:]),
            ]
        )

    def extreme_points(self) -> npt.NDArray[np.float64]:
        return np.array(
            [
                np.concatenate([a, b])
                for a, b in itertools.product(
                    self.left.extreme_points(), self.right.extreme_points()
                )
            ]
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "product",
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }


def product_descriptor(X: Space, Y: Space) -> ProductSpace:
    return ProductSpace(X, Y)


def _dominance(
    X: Space, Y: Space, anchor: ProductVector, tol: Tolerances
) -> tuple[str, float, float]:
    """Which factor carries the norm: "left", "right", "equal" or "marginal"."""
    nx, ny = X.norm(anchor.x), Y.norm(anchor.y)
    top = max(nx, ny)
    if top <= tol.eps_zero:
        raise ZeroAnchor(top)
    gap = (nx - ny) / top
    if abs(gap) <= tol.eps_eq:
        return "equal", nx, ny
    if abs(gap) <= tol.eps_band:
        return "marginal", nx, ny
    return ("left" if gap > 0 else "right"), nx, ny


def _direction_scale(X: Space, Y: Space, direction: ProductVector) -> float:
    return max(X.norm(direction.x), Y.norm(direction.y))


def closed_form_positive_part(
    X: Space,
    Y: Space,
    anchor: ProductVector,
    direction: ProductVector,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Decision:
    """(x,y)^+ is x^+ x Y when ||x|| > ||y||, and (x^+ x Y) u (X x y^+) on a tie."""
    return _closed_form_part(X, Y, anchor, direction, tol, in_positive_part)


def closed_form_negative_part(
    X: Space,
    Y: Space,
    anchor: ProductVector,
    direction: ProductVector,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Decision:
    """(x,y)^- is x^- x Y when ||x|| > ||y||, and (x^- x Y) u (X x y^-) on a tie."""
    return _closed_form_part(X, Y, anchor, direction, tol, in_negative_part)


def _closed_form_part(X, Y, anchor, direction, tol, member) -> Decision:
    case, nx, ny = _dominance(X, Y, anchor, tol)
    witnesses = {"case": case, "norm_x": nx, "norm_y": ny}
    if case == "marginal":
        return Decision.inconclusive("near tie between factor norms", **witnesses)
    scale = _direction_scale(X, Y, direction)
    if case == "left":
        return Decision(member(X, anchor.x, direction.x, tol, scale).verdict, witnesses)
    if case == "right":
        return Decision(member(Y, anchor.y, direction.y, tol, scale).verdict, witnesses)
    verdict = any_of(
        [
            member(X, anchor.x, direction.x, tol, scale),
            member(Y, anchor.y, direction.y, tol, scale),
        ]
    )
    return Decision(verdict, witnesses)


def closed_form_orthogonality_set(
    X: Space,
    Y: Space,
    anchor: ProductVector,
    direction: ProductVector,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Decision:
    """(x,y)^perp is x^perp x Y when ||x|| > ||y||, and
    (x^+ x y^-) u (x^- x y^+) on a tie."""
    case, nx, ny = _dominance(X, Y, anchor, tol)
    witnesses = {"case": case, "norm_x": nx, "norm_y": ny}
    if case == "marginal":
        return Decision.inconclusive("near tie between factor norms", **witnesses)
    scale = _direction_scale(X, Y, direction)
    if case == "left":
        return Decision(
            is_bj_orthogonal(X, anchor.x, direction.x, tol, scale).verdict, witnesses
        )
    if case == "right":
        return Decision(
            is_bj_orthogonal(Y, anchor.y, direction.y, tol, scale).verdict, witnesses
        )
    x_plus = in_positive_part(X, anchor.x, direction.x, tol, scale)
    x_minus = in_negative_part(X, anchor.x, direction.x, tol, scale)
    y_plus = in_positive_part(Y, anchor.y, direction.y, tol, scale)
    y_minus = in_negative_part(Y, anchor.y, direction.y, tol, scale)
    verdict = any_of(
        [
            Decision(all_of([x_plus, y_minus])),
            Decision(all_of([x_minus, y_plus])),
        ]
    )
    return Decision(verdict, witnesses)


def is_smooth_point_product(
    X: Space,
    Y: Space,
    anchor: ProductVector,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Decision:
    """Smooth points of the product sphere.

    They are the pairs where exactly one coordinate is on its sphere, the
    other strictly inside its ball, and the first is a smooth point.

    Raises:
        NotOnUnitSphere: If ||(x, y)|| differs from 1 by more than eps_eq
    """
    nx, ny = X.norm(anchor.x), Y.norm(anchor.y)
    top = max(nx, ny)
    if abs(top - 1.0) > tol.eps_eq:
        raise NotOnUnitSphere(top)
    witnesses = {"norm_x": nx, "norm_y": ny}
    x_on, y_on = nx >= 1.0 - tol.eps_eq, ny >= 1.0 - tol.eps_eq
    if x_on and y_on:
        return Decision.fails("both coordinates on their spheres", **witnesses)
    if x_on:
        space, point, inner = X, anchor.x, ny
    else:
        space, point, inner = Y, anchor.y, nx
    if inner > 1.0 - tol.eps_band:
        return Decision.inconclusive("inner coordinate within the band", **witnesses)
    factor = is_smooth_point(space, point, tol)
    return Decision(
        factor.verdict,
        {**witnesses, "sphere_coordinate": "x" if x_on else "y", **factor.witnesses},
    )


def right_additivity_counterexample(
    anchor: ProductVector,
) -> tuple[ProductVector, ProductVector, ProductVector]:
    """Directions a, b with (x,y) orthogonal to both but not to a + b.

    Valid when both coordinates lie on their unit spheres: a = (-x/2, y),
    b = (x, -y/2), a + b = (x/2, y/2).
    """
    a = ProductVector(-0.5 * anchor.x, anchor.y.copy())
    b = ProductVector(anchor.x.copy(), -0.5 * anchor.y)
    return a, b, a + b
