"""Invariant suites behind the ``verify`` command."""

import math
import time
import zlib
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Optional

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from bilinorm.bilinear import (
    BilinearOperator,
    bilinear_norm,
    builtin_operator,
    evaluate,
    fix_first,
    fix_second,
    linear_norm,
    norm_attainment_set,
    random_operator,
)
from bilinorm.config import RunConfig
from bilinorm.decision import Decision, Verdict, all_of
from bilinorm.metrics import checks_total, suite_duration_seconds
from bilinorm.orthogonality import (
    bj_oracle,
    in_negative_part,
    in_positive_part,
    is_bj_orthogonal,
    negative_part_oracle,
    positive_part_oracle,
)
from bilinorm.product import (
    ProductSpace,
    ProductVector,
    closed_form_negative_part,
    closed_form_orthogonality_set,
    closed_form_positive_part,
    is_smooth_point_product,
    right_additivity_counterexample,
)
from bilinorm.schemas import CheckRecord
from bilinorm.sip import BARYCENTER, LEXMIN, smooth_selector_agreement, verify_sip_axioms
from bilinorm.spaces import (
    PolyhedralSpace,
    Space,
    SpaceError,
    Vector,
    is_smooth_point,
    lp_space,
)
from bilinorm.theorems import (
    NotSingleOrbit,
    linear_attains_at_smooth,
    operator_smoothness,
    operators_orthogonal_direct,
    operators_orthogonal_witness,
    right_additivity_check,
    single_orbit_reduction,
    sip_identity_residual,
    sip_theorem_search,
    smooth_example_report,
    verify_sip_theorem_smooth,
)

logger = structlog.get_logger()

SUITES = (
    "definitions",
    "product-props",
    "smooth-product",
    "bilinear-core",
    "operator-orth",
    "operator-smooth",
    "sip-theorem",
    "smooth-example",
)
ALL_SUITES = "all"
# Alternative suite names and the suite each one runs
SUITE_ALIASES = {"paper-example": "smooth-example"}

FAMILIES = ("1", "2", "4", "inf")
BILINEARITY_TOL = 1e-12
EXACT_SCALING_TOL = 1e-12
ASCENT_SCALING_TOL = 1e-9
SPHERE_TOL = 1e-9

Check = tuple[str, str, Callable[[np.random.Generator], Decision]]


class UnknownSuite(ValueError):
    """Raised for a suite name outside SUITES and "all"."""

    def __init__(self, name: str):
        known = SUITES + tuple(SUITE_ALIASES) + (ALL_SUITES,)
        super().__init__(f"Unknown suite '{name}'. Known: {', '.join(known)}")
        self.name = name


class SuiteSizes(BaseModel):
    """Instance counts of the randomised checks."""

    model_config = ConfigDict(frozen=True)

    bj_triples: int = Field(default=10000, ge=1)
    sip_samples: int = Field(default=1000, ge=1)
    product_instances: int = Field(default=2000, ge=1)
    smooth_anchors: int = Field(default=2000, ge=1)
    bilinearity_probes: int = Field(default=1000, ge=1)
    attainment_operators: int = Field(default=100, ge=1)
    slice_operators: int = Field(default=20, ge=1)
    ascent_operators: int = Field(default=20, ge=1)
    operator_pairs: int = Field(default=200, ge=1)
    homogeneity_pairs: int = Field(default=20, ge=1)
    additivity_pairs: int = Field(default=50, ge=1)
    sip_tensors: int = Field(default=10, ge=1, description="Per p in (2, 4)")
    sip_theorem_samples: int = Field(default=500, ge=1)


@dataclass
class Agreement:
    """Tally of two decision routes compared on the same instances."""

    agree: int = 0
    disagree: int = 0
    marginal: int = 0
    first_disagreement: Optional[dict[str, Any]] = None

    def compare(self, left: Verdict, right: Verdict, **context: Any) -> None:
        """Count a pair of verdicts; instances with an inconclusive side are skipped."""
        if Verdict.INCONCLUSIVE in (left, right):
            self.marginal += 1
        elif left is right:
            self.agree += 1
        else:
            self.disagree += 1
            if self.first_disagreement is None:
                self.first_disagreement = {
                    "left": left.value,
                    "right": right.value,
                    **context,
                }
                logger.warning(
                    "routes_disagree", left=left.value, right=right.value
                )

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "agree": self.agree,
            "disagree": self.disagree,
            "marginal": self.marginal,
        }
        if self.first_disagreement is not None:
            data["first_disagreement"] = self.first_disagreement
        return data

    def decision(self) -> Decision:
        return Decision.from_bool(self.disagree == 0, **self.to_dict())


def _tallies(**tallies: Agreement) -> Decision:
    decisions = [t.decision() for t in tallies.values()]
    return Decision(all_of(decisions), {k: t.to_dict() for k, t in tallies.items()})


@dataclass
class SuiteResult:
    """Records of one suite run."""

    suite: str
    records: list[CheckRecord] = field(default_factory=list)
    duration_s: float = 0.0

    def counts(self) -> dict[str, int]:
        return {v.value: sum(r.verdict is v for r in self.records) for v in Verdict}

    def passed(self, strict: bool = False) -> bool:
        """No failures; with ``strict`` no inconclusive checks either."""
        counts = self.counts()
        if strict:
            return counts[Verdict.HOLDS.value] == len(self.records)
        return counts[Verdict.FAILS.value] == 0

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for logging/report summary."""
        return {
            "suite": self.suite,
            "checks": len(self.records),
            **self.counts(),
            "duration_s": round(self.duration_s, 3),
        }


# ============================================================================
# Random instances
# ============================================================================


def _random_space(
    rng: np.random.Generator,
    families: tuple[str, ...] = FAMILIES,
    dims: tuple[int, ...] = (2, 3),
) -> Space:
    p = families[int(rng.integers(len(families)))]
    return lp_space(p, dims[int(rng.integers(len(dims)))])


def _random_anchor(space: Space, rng: np.random.Generator) -> Vector:
    """A corner, a basis direction or a Gaussian point, at a random scale."""
    kind = int(rng.integers(3))
    scale = math.exp(rng.uniform(-1.0, 1.0))
    if kind == 0 and space.is_polyhedral:
        points = space.extreme_points()
        return scale * points[int(rng.integers(len(points)))]
    if kind == 0:
        return scale * np.eye(space.dim)[int(rng.integers(space.dim))]
    return scale * rng.standard_normal(space.dim)


def _orthogonalised(space: Space, x: Vector, y: Vector) -> Vector:
    """y minus its component along x for the barycentric supporting functional at x."""
    f = space.support_functionals(x).barycenter()
    return y - (f @ y) / (f @ x) * x


def _unit(space: Space, v: Vector) -> Vector:
    return v / space.norm(v)


# ============================================================================
# Service
# ============================================================================


class VerificationService:
    """Runs the named invariant suites and collects their check records."""

    def __init__(self, config: RunConfig, sizes: Optional[SuiteSizes] = None):
        self.config = config
        self.tol = config.tolerances
        self.sizes = sizes or SuiteSizes()
        self._suites: dict[str, Callable[[], list[Check]]] = {
            "definitions": self._definitions,
            "product-props": self._product_props,
            "smooth-product": self._smooth_product,
            "bilinear-core": self._bilinear_core,
            "operator-orth": self._operator_orth,
            "operator-smooth": self._operator_smooth,
            "sip-theorem": self._sip_theorem,
        }

    def run(self, suite: str) -> list[SuiteResult]:
        """Run one suite, or every suite for "all".

        Raises:
            UnknownSuite: If the name is not a known suite
        """
        if suite == ALL_SUITES:
            names: tuple[str, ...] = SUITES
        elif suite in SUITES or suite in SUITE_ALIASES:
            names = (suite,)
        else:
            raise UnknownSuite(suite)
        return [self.run_suite(name) for name in names]

    def run_suite(self, name: str) -> SuiteResult:
        logger.info("suite_started", suite=name, seed=self.config.seed)
        start = time.perf_counter()
        target = SUITE_ALIASES.get(name, name)
        if target == "smooth-example":
            records = [self._stamp(r.model_copy(update={"suite": name}))
                       for r in smooth_example_report(self.tol)]
            for r in records:
                checks_total.labels(suite=name, verdict=r.verdict.value).inc()
        else:
            records = [self._run_check(name, check) for check in self._suites[target]()]
        result = SuiteResult(name, records, time.perf_counter() - start)
        suite_duration_seconds.labels(suite=name).observe(result.duration_s)
        logger.info("suite_finished", **result.to_dict())
        return result

    def _rng(self, suite: str, check: str) -> np.random.Generator:
        return np.random.default_rng(
            [self.config.seed, zlib.crc32(f"{suite}/{check}".encode())]
        )

    def _stamp(self, record: CheckRecord) -> CheckRecord:
        if not self.config.timestamps:
            return record
        return record.model_copy(update={"timestamp": datetime.now(timezone.utc)})

    def _run_check(self, suite: str, check: Check) -> CheckRecord:
        name, claim, fn = check
        start = time.perf_counter()
        try:
            decision = fn(self._rng(suite, name))
        except SpaceError as e:
            logger.error("check_error", suite=suite, check=name, error=str(e))
            decision = Decision.fails(f"{type(e).__name__}: {e}")
        runtime_ms = (time.perf_counter() - start) * 1000.0
        checks_total.labels(suite=suite, verdict=decision.verdict.value).inc()
        logger.debug("check_finished", suite=suite, check=name,
                     verdict=decision.verdict.value)
        return self._stamp(
            CheckRecord.from_decision(name, claim, decision, self.tol, runtime_ms,
                                      suite=suite)
        )

    # ------------------------------------------------------------------
    # definitions
    # ------------------------------------------------------------------

    def _definitions(self) -> list[Check]:
        return [
            (
                "bj_derivative_vs_oracle",
                "One-sided derivative memberships agree with golden-section "
                "minimisation of t -> ||x + t y||",
                self._bj_equivalence,
            ),
            (
                "sip_axioms",
                "The barycentric selector is a semi-inner-product compatible with "
                "l1, l2, l4 and l_inf norms in dimensions 2 to 4",
                self._sip_axioms,
            ),
            (
                "smooth_sip_unique",
                "On smooth spaces every selector gives the same semi-inner-product",
                self._smooth_sip_unique,
            ),
        ]

    def _definition_spaces(self) -> list[Space]:
        hexagon = PolyhedralSpace.from_facets([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        return [lp_space(p, n) for p in FAMILIES for n in (2, 3, 4)] + [hexagon]

    def _bj_equivalence(self, rng: np.random.Generator) -> Decision:
        spaces = self._definition_spaces()
        bj, plus, minus = Agreement(), Agreement(), Agreement()
        for _ in range(self.sizes.bj_triples):
            space = spaces[int(rng.integers(len(spaces)))]
            x = _random_anchor(space, rng)
            y = rng.standard_normal(space.dim)
            if rng.random() < 0.4:
                y = _orthogonalised(space, x, y)
            context = {"space": space.label, "x": x, "y": y}
            bj.compare(is_bj_orthogonal(space, x, y, self.tol).verdict,
                       bj_oracle(space, x, y, self.tol).verdict, **context)
            plus.compare(in_positive_part(space, x, y, self.tol).verdict,
                         positive_part_oracle(space, x, y, self.tol).verdict, **context)
            minus.compare(in_negative_part(space, x, y, self.tol).verdict,
                          negative_part_oracle(space, x, y, self.tol).verdict, **context)
        return _tallies(orthogonality=bj, positive_part=plus, negative_part=minus)

    def _sip_axioms(self, rng: np.random.Generator) -> Decision:
        decisions = {}
        for p in FAMILIES:
            for n in (2, 3, 4):
                space = lp_space(p, n)
                decisions[space.label] = verify_sip_axioms(
                    space, BARYCENTER, self.sizes.sip_samples, int(rng.integers(2**31)),
                    self.tol,
                )
        return Decision(all_of(decisions.values()), decisions)

    def _smooth_sip_unique(self, rng: np.random.Generator) -> Decision:
        decisions = {}
        for p in ("2", "4"):
            for n in (2, 3, 4):
                space = lp_space(p, n)
                decisions[space.label] = smooth_selector_agreement(
                    space, (BARYCENTER, LEXMIN), self.sizes.sip_samples // 10 or 1,
                    int(rng.integers(2**31)), self.tol,
                )
        return Decision(all_of(decisions.values()), decisions)

    # ------------------------------------------------------------------
    # product-props
    # ------------------------------------------------------------------

    def _product_props(self) -> list[Check]:
        return [
            (
                "closed_form_parts_vs_oracle",
                "(x,y)^+, (x,y)^- and (x,y)^perp follow the dominant factor, or the "
                "union rule on a tie, as the direct definition confirms",
                lambda rng: self._product_parts(rng, generic=False),
            ),
            (
                "closed_form_vs_product_support",
                "The factor rules agree with the support functionals of the max norm",
                lambda rng: self._product_parts(rng, generic=True),
            ),
        ]

    def _product_instance(
        self, rng: np.random.Generator
    ) -> tuple[Space, Space, ProductVector, ProductVector]:
        X, Y = _random_space(rng), _random_space(rng)
        x = _unit(X, _random_anchor(X, rng))
        y = _unit(Y, _random_anchor(Y, rng))
        case = int(rng.integers(3))
        if case == 0:
            y = rng.uniform(0.1, 0.9) * y
        elif case == 1:
            x = rng.uniform(0.1, 0.9) * x

        u = rng.standard_normal(X.dim)
        v = rng.standard_normal(Y.dim)
        mode = int(rng.integers(3))
        if mode == 1:
            u, v = _orthogonalised(X, x, u), _orthogonalised(Y, y, v)
        elif mode == 2:
            u = _orthogonalised(X, x, u) + rng.uniform(0.1, 1.0) * x
            v = _orthogonalised(Y, y, v) - rng.uniform(0.1, 1.0) * y
        return X, Y, ProductVector(x, y), ProductVector(u, v)

    def _product_parts(self, rng: np.random.Generator, generic: bool) -> Decision:
        plus, minus, perp = Agreement(), Agreement(), Agreement()
        for _ in range(self.sizes.product_instances):
            X, Y, anchor, direction = self._product_instance(rng)
            P = ProductSpace(X, Y)
            p, d = anchor.joined(), direction.joined()
            if generic:
                references = (
                    in_positive_part(P, p, d, self.tol),
                    in_negative_part(P, p, d, self.tol),
                    is_bj_orthogonal(P, p, d, self.tol),
                )
            else:
                references = (
                    positive_part_oracle(P, p, d, self.tol),
                    negative_part_oracle(P, p, d, self.tol),
                    bj_oracle(P, p, d, self.tol),
                )
            context = {"space": P.label, "anchor": p, "direction": d}
            plus.compare(closed_form_positive_part(X, Y, anchor, direction, self.tol).verdict,
                         references[0].verdict, **context)
            minus.compare(closed_form_negative_part(X, Y, anchor, direction, self.tol).verdict,
                          references[1].verdict, **context)
            perp.compare(
                closed_form_orthogonality_set(X, Y, anchor, direction, self.tol).verdict,
                references[2].verdict, **context,
            )
        return _tallies(positive_part=plus, negative_part=minus, orthogonality=perp)

    # ------------------------------------------------------------------
    # smooth-product
    # ------------------------------------------------------------------

    def _smooth_product(self) -> list[Check]:
        return [
            (
                "smooth_points_of_product",
                "(x,y) is smooth iff exactly one coordinate is on its sphere, the "
                "other inside its ball, and the first is smooth",
                self._smooth_points,
            ),
            (
                "right_additivity_fails_on_both_spheres",
                "With both coordinates on their spheres, (x,y) is orthogonal to "
                "(-x/2, y) and (x, -y/2) but not to their sum",
                self._right_additivity_counterexamples,
            ),
        ]

    def _sphere_anchor(
        self, rng: np.random.Generator, case: int
    ) -> tuple[Space, Space, ProductVector]:
        X, Y = _random_space(rng), _random_space(rng)
        x = _unit(X, _random_anchor(X, rng))
        y = _unit(Y, _random_anchor(Y, rng))
        if case == 0:
            y = rng.uniform(0.0, 0.95) * y
        elif case == 1:
            x = rng.uniform(0.0, 0.95) * x
        return X, Y, ProductVector(x, y)

    def _smooth_points(self, rng: np.random.Generator) -> Decision:
        agreement = Agreement()
        for _ in range(self.sizes.smooth_anchors):
            X, Y, anchor = self._sphere_anchor(rng, int(rng.integers(3)))
            P = ProductSpace(X, Y)
            agreement.compare(
                is_smooth_point_product(X, Y, anchor, self.tol).verdict,
                is_smooth_point(P, anchor.joined(), self.tol).verdict,
                space=P.label,
                anchor=anchor.joined(),
            )
        return agreement.decision()

    def _right_additivity_counterexamples(self, rng: np.random.Generator) -> Decision:
        violations = 0
        count = max(1, self.sizes.smooth_anchors // 10)
        for _ in range(count):
            X, Y, anchor = self._sphere_anchor(rng, case=2)
            P = ProductSpace(X, Y)
            a, b, total = right_additivity_counterexample(anchor)
            p = anchor.joined()
            verdicts = (
                bj_oracle(P, p, a.joined(), self.tol).verdict,
                bj_oracle(P, p, b.joined(), self.tol).verdict,
                bj_oracle(P, p, total.joined(), self.tol).verdict,
            )
            if verdicts != (Verdict.HOLDS, Verdict.HOLDS, Verdict.FAILS):
                violations += 1
        return Decision.from_bool(violations == 0, instances=count, violations=violations)

    # ------------------------------------------------------------------
    # bilinear-core
    # ------------------------------------------------------------------

    def _bilinear_core(self) -> list[Check]:
        return [
            ("bilinearity", "T is linear in each argument", self._bilinearity),
            (
                "slices",
                "T(x0, .) and T(., y0) agree with evaluation; ||T(x0, .)|| <= ||T|| "
                "with equality at a maximiser",
                self._slices,
            ),
            ("scaling", "||alpha T|| = |alpha| ||T||", self._scaling),
            (
                "attainment_not_smooth",
                "Every maximiser of a non-zero T has both coordinates on the unit "
                "spheres and is not a smooth point of the product sphere",
                self._attainment_not_smooth,
            ),
            (
                "ascent_matches_enumeration",
                "Alternating ascent reaches the exhaustive value on l_inf domains",
                self._ascent_matches_enumeration,
            ),
            (
                "linear_attains_at_smooth",
                "A rank-one linear operator attains its norm at a smooth point, "
                "which a bilinear operator never does",
                self._linear_attains_at_smooth,
            ),
        ]

    def _random_operator(
        self, rng: np.random.Generator, families: tuple[str, ...] = FAMILIES
    ) -> BilinearOperator:
        X = _random_space(rng, families)
        Y = _random_space(rng, families)
        Z = _random_space(rng, families, dims=(1, 2, 3))
        return random_operator(X, Y, Z, rng)

    def _bilinearity(self, rng: np.random.Generator) -> Decision:
        worst = 0.0
        T = self._random_operator(rng)
        for k in range(self.sizes.bilinearity_probes):
            if k % 50 == 0:
                T = self._random_operator(rng)
            x, x2 = rng.standard_normal((2, T.X.dim))
            y, y2 = rng.standard_normal((2, T.Y.dim))
            a = rng.standard_normal()
            size = np.abs(T.coeffs).sum()
            for lhs, rhs, magnitude in (
                (
                    evaluate(T, a * x + x2, y),
                    a * evaluate(T, x, y) + evaluate(T, x2, y),
                    (abs(a) * np.abs(x).max() + np.abs(x2).max()) * np.abs(y).max(),
                ),
                (
                    evaluate(T, x, a * y + y2),
                    a * evaluate(T, x, y) + evaluate(T, x, y2),
                    (abs(a) * np.abs(y).max() + np.abs(y2).max()) * np.abs(x).max(),
                ),
            ):
                error = float(np.abs(lhs - rhs).max()) / max(1.0, size * magnitude)
                worst = max(worst, error)
        return Decision.from_bool(worst <= BILINEARITY_TOL, worst_error=worst)

    def _slices(self, rng: np.random.Generator) -> Decision:
        failures = []
        cfg = self.config
        for k in range(self.sizes.slice_operators):
            T = self._random_operator(rng, ("2", "inf"))
            x0 = _unit(T.X, rng.standard_normal(T.X.dim))
            y0 = _unit(T.Y, rng.standard_normal(T.Y.dim))
            y = rng.standard_normal(T.Y.dim)
            x = rng.standard_normal(T.X.dim)
            if not (
                np.allclose(fix_first(T, x0).apply(y), evaluate(T, x0, y), atol=1e-12)
                and np.allclose(fix_second(T, y0).apply(x), evaluate(T, x, y0), atol=1e-12)
            ):
                failures.append({"operator": k, "reason": "slice evaluation"})
                continue
            M = norm_attainment_set(T, self.tol, cfg.starts, cfg.seed, cfg.workers)
            slack = self.tol.eps_eq * max(1.0, M.value)
            sliced = linear_norm(fix_first(T, x0), self.tol, cfg.starts, cfg.seed).value
            if sliced > M.value + slack:
                failures.append({"operator": k, "reason": "slice exceeds ||T||"})
            at_max = linear_norm(fix_first(T, M.orbits[0][0]), self.tol, cfg.starts,
                                 cfg.seed).value
            if abs(at_max - M.value) > self.tol.eps_attain * M.value + slack:
                failures.append({"operator": k, "reason": "slice at maximiser",
                                 "slice": at_max, "norm": M.value})
        return Decision.from_bool(not failures, failures=failures[:5],
                                  operators=self.sizes.slice_operators)

    def _scaling(self, rng: np.random.Generator) -> Decision:
        worst = {"exact": 0.0, "ascent": 0.0}
        cfg = self.config
        for k in range(10):
            T = self._random_operator(rng, ("inf",) if k < 7 else ("2",))
            alpha = rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 3.0)
            base = bilinear_norm(T, self.tol, cfg.starts, cfg.seed, cfg.workers)
            scaled = bilinear_norm(T.scaled(alpha), self.tol, cfg.starts, cfg.seed,
                                   cfg.workers)
            error = abs(scaled.value - abs(alpha) * base.value) / base.value
            key = "exact" if base.exact else "ascent"
            worst[key] = max(worst[key], error)
        ok = worst["exact"] <= EXACT_SCALING_TOL and worst["ascent"] <= ASCENT_SCALING_TOL
        return Decision.from_bool(ok, worst_relative_error=worst)

    def _attainment_not_smooth(self, rng: np.random.Generator) -> Decision:
        cfg = self.config
        representatives = 0
        violations = []
        for k in range(self.sizes.attainment_operators):
            family = ("inf",) if k % 2 == 0 else ("2",)
            T = random_operator(_random_space(rng, family), _random_space(rng, family),
                                _random_space(rng, family), rng)
            M = norm_attainment_set(T, self.tol, cfg.starts, cfg.seed, cfg.workers)
            for x, y in M.orbits:
                representatives += 1
                on_spheres = (abs(T.X.norm(x) - 1.0) <= SPHERE_TOL
                              and abs(T.Y.norm(y) - 1.0) <= SPHERE_TOL)
                smooth = is_smooth_point_product(T.X, T.Y, ProductVector(x, y), self.tol)
                if not on_spheres or not smooth.is_fails:
                    violations.append({"operator": k, "x": x, "y": y})
        return Decision.from_bool(
            not violations,
            operators=self.sizes.attainment_operators,
            representatives=representatives,
            violations=violations[:5],
        )

    def _ascent_matches_enumeration(self, rng: np.random.Generator) -> Decision:
        cfg = self.config
        worst = 0.0
        for _ in range(self.sizes.ascent_operators):
            T = self._random_operator(rng, ("inf",))
            exact = bilinear_norm(T, self.tol)
            ascent = bilinear_norm(T, self.tol, cfg.starts, cfg.seed, cfg.workers,
                                   force_ascent=True)
            worst = max(worst, abs(exact.value - ascent.value) / exact.value)
        return Decision.from_bool(worst <= 1e-9, worst_relative_gap=worst)

    def _linear_attains_at_smooth(self, rng: np.random.Generator) -> Decision:
        X = Z = lp_space("inf", 2)
        x0 = np.array([1.0, 0.5])
        A = linear_attains_at_smooth(X, Z, x0, np.array([1.0, 0.0]), self.tol)
        norm = linear_norm(A, self.tol)
        attained = Z.norm(A.apply(x0))
        smooth = is_smooth_point(X, x0, self.tol)

        T = builtin_operator("smooth-example")
        M = norm_attainment_set(T, self.tol)
        bilinear_smooth = [
            is_smooth_point_product(T.X, T.Y, ProductVector(x, y), self.tol).verdict
            for x, y in M.signed_members()
        ]
        ok = (
            norm.value == 1.0
            and attained == 1.0
            and smooth.is_holds
            and all(v is Verdict.FAILS for v in bilinear_smooth)
        )
        return Decision.from_bool(
            ok, linear_norm=norm.value, attained_at_x0=attained, x0=x0,
            bilinear_maximisers_smooth=[v.value for v in bilinear_smooth],
        )

    # ------------------------------------------------------------------
    # operator-orth
    # ------------------------------------------------------------------

    def _operator_orth(self) -> list[Check]:
        return [
            (
                "witness_vs_direct",
                "T is orthogonal to A iff M_T holds pairs with A(x,y) in T(x,y)^+ and "
                "in T(x,y)^-, as minimising ||T + lambda A|| confirms",
                self._witness_vs_direct,
            ),
            (
                "self_orthogonality_fails",
                "A non-zero T is never orthogonal to itself",
                self._self_orthogonality,
            ),
            (
                "verdicts_homogeneous",
                "Verdicts are unchanged under T -> alpha T and A -> beta A",
                self._homogeneity,
            ),
        ]

    def _linf_operator(self, rng: np.random.Generator) -> BilinearOperator:
        L = lp_space("inf", 2)
        return random_operator(L, L, L, rng)

    def _direction_for(
        self, T: BilinearOperator, k: int, rng: np.random.Generator
    ) -> BilinearOperator:
        """Random, projected onto the orthogonal side at M_T, or a multiple of T."""
        A = random_operator(T.X, T.Y, T.Z, rng)
        kind = k % 3
        if kind == 1:
            M = norm_attainment_set(T, self.tol)
            x0, y0 = M.orbits[0]
            z0 = evaluate(T, x0, y0)
            f = T.Z.support_functionals(z0, self.tol).barycenter()
            return A.plus(T, -float(f @ evaluate(A, x0, y0)) / float(f @ z0))
        if kind == 2:
            return T.scaled(float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)))
        return A

    def _witness_vs_direct(self, rng: np.random.Generator) -> Decision:
        theorem, corollary = Agreement(), Agreement()
        for k in range(self.sizes.operator_pairs):
            T = self._linf_operator(rng)
            A = self._direction_for(T, k, rng)
            M = norm_attainment_set(T, self.tol)
            direct = operators_orthogonal_direct(T, A, self.tol).verdict
            witness = operators_orthogonal_witness(T, A, self.tol, attainment=M).verdict
            context = {"T": T.coeffs, "A": A.coeffs}
            theorem.compare(witness, direct, **context)
            try:
                reduced = single_orbit_reduction(T, A, self.tol, attainment=M).verdict
            except NotSingleOrbit:
                continue
            corollary.compare(reduced, direct, **context)
        return _tallies(witness_route=theorem, single_orbit_route=corollary)

    def _self_orthogonality(self, rng: np.random.Generator) -> Decision:
        count = max(1, self.sizes.operator_pairs // 10)
        verdicts = []
        for _ in range(count):
            T = self._linf_operator(rng)
            verdicts.append(operators_orthogonal_direct(T, T, self.tol).verdict)
        return Decision.from_bool(
            all(v is Verdict.FAILS for v in verdicts),
            operators=count,
            not_failing=sum(v is not Verdict.FAILS for v in verdicts),
        )

    def _homogeneity(self, rng: np.random.Generator) -> Decision:
        direct, witness = Agreement(), Agreement()
        for k in range(self.sizes.homogeneity_pairs):
            T = self._linf_operator(rng)
            A = self._direction_for(T, k, rng)
            # Log-uniform in [1e-6, 1e6]
            alpha, beta = 10.0 ** rng.uniform(-6.0, 6.0, 2)
            context = {"T": T.coeffs, "A": A.coeffs, "alpha": alpha, "beta": beta}
            for tally, route in ((direct, operators_orthogonal_direct),
                                 (witness, operators_orthogonal_witness)):
                before = route(T, A, self.tol).verdict
                after = route(T.scaled(alpha), A.scaled(beta), self.tol).verdict
                tally.compare(before, after, **context)
        return _tallies(direct_route=direct, witness_route=witness)

    # ------------------------------------------------------------------
    # operator-smooth
    # ------------------------------------------------------------------

    def _operator_smooth(self) -> list[Check]:
        expectations = [
            ("smooth-example", Verdict.HOLDS),
            ("first-coordinates", Verdict.HOLDS),
            ("coordinate-product", Verdict.FAILS),
        ]
        checks: list[Check] = [
            (
                f"smoothness_{name.replace('-', '_')}",
                f"operator_smoothness({name}) {expected.value}: smooth iff M_T is one "
                "sign orbit with a smooth image",
                self._expect_smoothness(name, expected),
            )
            for name, expected in expectations
        ]
        checks.append(
            (
                "right_additivity_at_smooth_operator",
                "At the smooth example, T orthogonal to A1 and A2 implies T "
                "orthogonal to A1 + A2",
                lambda rng: right_additivity_check(
                    builtin_operator("smooth-example"),
                    self.sizes.additivity_pairs,
                    int(rng.integers(2**31)),
                    self.tol,
                ),
            )
        )
        return checks

    def _expect_smoothness(
        self, name: str, expected: Verdict
    ) -> Callable[[np.random.Generator], Decision]:
        def check(rng: np.random.Generator) -> Decision:
            cfg = self.config
            observed = operator_smoothness(
                builtin_operator(name), self.tol, cfg.starts, cfg.seed, cfg.workers
            )
            return Decision.from_bool(
                observed.verdict is expected,
                observed=observed.verdict.value,
                expected=expected.value,
                details=observed.witnesses,
            )

        return check

    # ------------------------------------------------------------------
    # sip-theorem
    # ------------------------------------------------------------------

    def _sip_theorem(self) -> list[Check]:
        return [
            (
                "sip_identity_smooth",
                "On smooth spaces [T(x0,y)+T(x,y0), T(x0,y0)] = ||T||^2 ([x,x0] + "
                "[y,y0]) holds exactly at the maximisers",
                self._sip_identity_smooth,
            ),
            (
                "sip_identity_nonsmooth_search",
                "At the maximiser of the smooth example some selectors realise the "
                "identity on l_inf spaces",
                lambda rng: sip_theorem_search(
                    builtin_operator("smooth-example"),
                    (np.array([1.0, 1.0]), np.array([1.0, 1.0])),
                    seed=int(rng.integers(2**31)),
                    tol=self.tol,
                ),
            ),
            (
                "sip_identity_off_attainment",
                "Away from M_T the identity leaves a residual: T = x1 y1 at (e2, e2) "
                "gives residual 2",
                self._sip_identity_off_attainment,
            ),
        ]

    def _sip_identity_smooth(self, rng: np.random.Generator) -> Decision:
        cfg = self.config
        decisions = {"first-coordinates": verify_sip_theorem_smooth(
            builtin_operator("first-coordinates"), self.sizes.sip_theorem_samples,
            cfg.seed, self.tol, cfg.starts, cfg.workers,
        )}
        for p in ("2", "4"):
            L = lp_space(p, 2)
            for k in range(self.sizes.sip_tensors):
                T = random_operator(L, L, L, rng)
                decisions[f"l{p}[{k}]"] = verify_sip_theorem_smooth(
                    T, self.sizes.sip_theorem_samples, int(rng.integers(2**31)),
                    self.tol, cfg.starts, cfg.workers,
                )
        return Decision(all_of(decisions.values()), decisions)

    def _sip_identity_off_attainment(self, rng: np.random.Generator) -> Decision:
        e2 = np.array([0.0, 1.0])
        residual = sip_identity_residual(
            builtin_operator("first-coordinates"), (e2, e2), e2, e2, tol=self.tol
        )
        return Decision.from_bool(abs(residual - 2.0) <= 1e-12, residual=residual)
