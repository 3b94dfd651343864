"""Tests for Birkhoff-James orthogonality, the positive/negative parts and
the golden-section oracles."""

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from bilinorm.decision import Verdict
from bilinorm.orthogonality import (
    bj_oracle,
    gap_verdict,
    golden_section_min,
    in_negative_part,
    in_positive_part,
    is_bj_orthogonal,
    negative_part_oracle,
    one_sided_derivatives,
    positive_part_oracle,
    sign_verdict,
)
from bilinorm.spaces import L1Space, LinfSpace, LpSpace, ZeroAnchor


# ---------------------------------------------------------------------------
# Verdict helpers
# ---------------------------------------------------------------------------


class TestSignVerdict:
    """Sign decisions with the marginal band."""

    def test_positive(self, tol):
        assert sign_verdict(0.5, 1.0, tol) is Verdict.HOLDS

    def test_negative(self, tol):
        assert sign_verdict(-0.5, 1.0, tol) is Verdict.FAILS

    def test_within_equality_slack(self, tol):
        assert sign_verdict(-1e-10, 1.0, tol) is Verdict.HOLDS

    def test_inside_band(self, tol):
        assert sign_verdict(-5e-8, 1.0, tol) is Verdict.INCONCLUSIVE
        assert sign_verdict(5e-8, 1.0, tol) is Verdict.INCONCLUSIVE

    def test_relative_to_scale(self, tol):
        assert sign_verdict(-5e-8, 1e-6, tol) is Verdict.FAILS

    def test_zero_scale_holds(self, tol):
        assert sign_verdict(-3.0, 0.0, tol) is Verdict.HOLDS


class TestGapVerdict:
    """Relative dip of a minimum below a reference norm."""

    def test_no_dip(self, tol):
        assert gap_verdict(1.0, 1.0, tol) is Verdict.HOLDS

    def test_minimum_above_reference(self, tol):
        assert gap_verdict(1.0, 1.5, tol) is Verdict.HOLDS

    def test_clear_dip(self, tol):
        assert gap_verdict(1.0, 0.9, tol) is Verdict.FAILS

    def test_marginal_dip(self, tol):
        assert gap_verdict(1.0, 1.0 - 1e-10, tol) is Verdict.INCONCLUSIVE


# ---------------------------------------------------------------------------
# Derivative route
# ---------------------------------------------------------------------------


class TestOneSidedDerivatives:
    def test_smooth_point_derivatives_coincide(self, l2):
        d = one_sided_derivatives(l2, [3.0, 4.0], [1.0, 0.0])
        assert d.d_plus == pytest.approx(0.6)
        assert d.d_minus == pytest.approx(0.6)

    def test_corner_derivatives_split(self, linf):
        d = one_sided_derivatives(linf, [1.0, 1.0], [1.0, -1.0])
        assert d.d_plus == 1.0
        assert d.d_minus == -1.0
        assert d.to_dict() == {"d_plus": 1.0, "d_minus": -1.0}

    def test_zero_anchor(self, linf):
        with pytest.raises(ZeroAnchor):
            one_sided_derivatives(linf, [0.0, 0.0], [1.0, 0.0])


class TestBirkhoffJames:
    """Orthogonality and part membership from the one-sided derivatives."""

    def test_linf_edge_orthogonal(self, linf):
        assert is_bj_orthogonal(linf, [1.0, 0.0], [0.0, 1.0]).is_holds

    def test_parallel_not_orthogonal(self, linf):
        x = [1.0, 0.0]
        assert is_bj_orthogonal(linf, x, x).is_fails
        assert in_positive_part(linf, x, x).is_holds
        assert in_negative_part(linf, x, x).is_fails

    def test_linf_corner_orthogonal_to_antidiagonal(self, linf):
        assert is_bj_orthogonal(linf, [1.0, 1.0], [1.0, -1.0]).is_holds

    def test_linf_corner_only_positive_part(self, linf):
        x, y = [1.0, 1.0], [1.0, 0.5]
        assert in_positive_part(linf, x, y).is_holds
        assert in_negative_part(linf, x, y).is_fails
        assert is_bj_orthogonal(linf, x, y).is_fails

    def test_l2_is_euclidean_orthogonality(self, l2):
        assert is_bj_orthogonal(l2, [1.0, 0.0], [0.0, 1.0]).is_holds
        assert is_bj_orthogonal(l2, [1.0, 0.0], [1.0, 1.0]).is_fails

    def test_l1_zero_coordinate(self, l1):
        # ||(1, 0) + t(0, 1)||_1 = 1 + |t|
        assert is_bj_orthogonal(l1, [1.0, 0.0], [0.0, 1.0]).is_holds
        # ||(1, 0) + t(-0.5, 1)||_1 = |1 - t/2| + |t| >= 1
        assert is_bj_orthogonal(l1, [1.0, 0.0], [-0.5, 1.0]).is_holds

    def test_zero_direction_always_orthogonal(self, linf):
        assert is_bj_orthogonal(linf, [1.0, 0.3], [0.0, 0.0]).is_holds

    def test_marginal_direction_inconclusive(self, linf):
        decision = is_bj_orthogonal(linf, [1.0, 0.0], [5e-8, 1.0])
        assert decision.is_inconclusive
        assert decision.witnesses["d_plus"] == pytest.approx(5e-8)

    def test_near_zero_derivative_holds(self, linf):
        assert is_bj_orthogonal(linf, [1.0, 0.0], [1e-10, 1.0]).is_holds

    def test_homogeneous_in_both_arguments(self, hexagon):
        x, y = np.array([1.0, 0.0]), np.array([-0.5, 1.0])
        base = is_bj_orthogonal(hexagon, x, y).verdict
        assert is_bj_orthogonal(hexagon, 3.0 * x, -2.0 * y).verdict is base

    def test_explicit_scale(self, linf):
        # Derivative 1e-7 is marginal against ||y|| = 1 but clear against 1e-3
        x, y = [1.0, 0.0], [1e-7, 1.0]
        assert in_positive_part(linf, x, y, scale=1e-3).is_holds


# ---------------------------------------------------------------------------
# Golden-section oracle
# ---------------------------------------------------------------------------


class TestGoldenSection:
    """Golden-section minimisation of convex functions."""

    def test_v_shape(self):
        t, value = golden_section_min(lambda s: abs(s - 0.3) + 1.0, -1.0, 1.0, 1e-10)
        assert t == pytest.approx(0.3, abs=1e-9)
        assert value == pytest.approx(1.0, abs=1e-9)

    def test_quadratic(self):
        t, value = golden_section_min(lambda s: (s + 0.25) ** 2, -2.0, 2.0, 1e-10)
        assert t == pytest.approx(-0.25, abs=1e-6)
        assert value == pytest.approx(0.0, abs=1e-12)

    def test_minimum_at_endpoint(self):
        assert golden_section_min(lambda s: s, 0.0, 2.0, 1e-10) == (0.0, 0.0)

    def test_reversed_bracket(self):
        t, _ = golden_section_min(lambda s: abs(s - 0.5), 1.0, -1.0, 1e-10)
        assert t == pytest.approx(0.5, abs=1e-9)

    def test_bracket_narrower_than_width(self):
        assert golden_section_min(lambda s: -s, 0.0, 1e-12, 1e-10) == (1e-12, -1e-12)


class TestOracles:
    """Direct minimisation of t -> ||x + t y||."""

    def test_orthogonal(self, linf):
        decision = bj_oracle(linf, [1.0, 0.0], [0.0, 1.0])
        assert decision.is_holds
        assert decision.witnesses["minimum"] == pytest.approx(1.0)

    def test_parallel(self, linf):
        decision = bj_oracle(linf, [1.0, 0.0], [1.0, 0.0])
        assert decision.is_fails
        assert decision.witnesses["argmin"] == pytest.approx(-1.0, abs=1e-8)

    def test_one_sided(self, linf):
        assert positive_part_oracle(linf, [1.0, 0.0], [1.0, 0.0]).is_holds
        assert negative_part_oracle(linf, [1.0, 0.0], [1.0, 0.0]).is_fails

    def test_zero_direction(self, l2):
        decision = bj_oracle(l2, [1.0, 1.0], [0.0, 0.0])
        assert decision.is_holds
        assert decision.reason == "zero direction"

    def test_zero_anchor(self, l2):
        with pytest.raises(ZeroAnchor):
            bj_oracle(l2, [0.0, 0.0], [1.0, 0.0])

    def test_long_direction(self, l2):
        """The bracket shrinks with ||y||; the search must shrink with it."""
        x, y = [1.0, 0.0], [-1e11, 0.0]
        assert is_bj_orthogonal(l2, x, y).is_fails
        decision = bj_oracle(l2, x, y)
        assert decision.is_fails
        assert decision.witnesses["argmin"] == pytest.approx(1e-11, rel=1e-6)
        assert positive_part_oracle(l2, x, y).is_fails
        assert negative_part_oracle(l2, x, y).is_holds

    def test_short_direction(self, l2):
        x, y = [1.0, 0.0], [1e-9, 1e-9]
        assert is_bj_orthogonal(l2, x, y).is_fails
        decision = bj_oracle(l2, x, y)
        assert decision.is_fails
        assert decision.witnesses["minimum"] == pytest.approx(np.sqrt(0.5), rel=1e-9)

    @pytest.mark.parametrize("beta", [1e-9, 1e-3, 1e3, 1e9])
    def test_verdicts_unchanged_by_scaling_direction(self, linf, beta):
        x, y = np.array([1.0, 0.5]), np.array([1.0, 0.0])
        assert bj_oracle(linf, x, beta * y).is_fails
        assert positive_part_oracle(linf, x, beta * y).is_holds
        assert negative_part_oracle(linf, x, beta * y).is_fails
        assert bj_oracle(linf, x, beta * np.array([0.0, 1.0])).is_holds


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------

small_ints = st.lists(st.integers(min_value=-3, max_value=3), min_size=3, max_size=3)
ROUTE_SPACES = [L1Space(3), LpSpace(2.0, 3), LinfSpace(3)]


@pytest.mark.property_based
class TestDerivativeRouteMatchesOracle:
    """Both routes agree on integer instances, where nothing is marginal."""

    @given(small_ints, small_ints, st.sampled_from(ROUTE_SPACES))
    @settings(max_examples=150, deadline=None)
    def test_orthogonality(self, a, b, space):
        assume(any(a))
        x, y = np.array(a, dtype=float), np.array(b, dtype=float)
        assert is_bj_orthogonal(space, x, y).verdict is bj_oracle(space, x, y).verdict

    @given(small_ints, small_ints, st.sampled_from(ROUTE_SPACES))
    @settings(max_examples=150, deadline=None)
    def test_parts(self, a, b, space):
        assume(any(a))
        x, y = np.array(a, dtype=float), np.array(b, dtype=float)
        assert (
            in_positive_part(space, x, y).verdict
            is positive_part_oracle(space, x, y).verdict
        )
        assert (
            in_negative_part(space, x, y).verdict
            is negative_part_oracle(space, x, y).verdict
        )

    @given(
        small_ints,
        small_ints,
        st.sampled_from(ROUTE_SPACES),
        st.integers(min_value=-6, max_value=6),
        st.integers(min_value=-9, max_value=9),
    )
    @settings(max_examples=150, deadline=None)
    def test_extreme_scales(self, a, b, space, alpha_exp, beta_exp):
        """Verdicts of both routes are unchanged under x -> alpha x, y -> beta y."""
        assume(any(a))
        x, y = np.array(a, dtype=float), np.array(b, dtype=float)
        xs, ys = 10.0**alpha_exp * x, 10.0**beta_exp * y
        expected = bj_oracle(space, x, y).verdict
        assert is_bj_orthogonal(space, xs, ys).verdict is expected
        assert bj_oracle(space, xs, ys).verdict is expected
        assert positive_part_oracle(space, xs, ys).verdict is (
            positive_part_oracle(space, x, y).verdict
        )
