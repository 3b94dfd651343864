"""Tests for the verification service and its invariant suites."""

import pytest

from bilinorm.config import RunConfig
from bilinorm.decision import Decision, Verdict
from bilinorm.schemas import CheckRecord
from bilinorm.services.verification_service import (
    ALL_SUITES,
    SUITES,
    Agreement,
    SuiteResult,
    SuiteSizes,
    UnknownSuite,
    VerificationService,
)
from bilinorm.spaces import ZeroAnchor

SMALL = SuiteSizes(
    bj_triples=40,
    sip_samples=20,
    product_instances=40,
    smooth_anchors=40,
    bilinearity_probes=20,
    attainment_operators=4,
    slice_operators=3,
    ascent_operators=3,
    operator_pairs=6,
    homogeneity_pairs=3,
    additivity_pairs=2,
    sip_tensors=1,
    sip_theorem_samples=20,
)

EXPECTED_CHECKS = {
    "definitions": ["bj_derivative_vs_oracle", "sip_axioms", "smooth_sip_unique"],
    "product-props": ["closed_form_parts_vs_oracle", "closed_form_vs_product_support"],
    "smooth-product": ["smooth_points_of_product", "right_additivity_fails_on_both_spheres"],
    "bilinear-core": [
        "bilinearity", "slices", "scaling", "attainment_not_smooth",
        "ascent_matches_enumeration", "linear_attains_at_smooth",
    ],
    "operator-orth": ["witness_vs_direct", "self_orthogonality_fails", "verdicts_homogeneous"],
    "operator-smooth": [
        "smoothness_smooth_example", "smoothness_first_coordinates",
        "smoothness_coordinate_product", "right_additivity_at_smooth_operator",
    ],
    "sip-theorem": [
        "sip_identity_smooth", "sip_identity_nonsmooth_search",
        "sip_identity_off_attainment",
    ],
    "smooth-example": [
        "defining_values", "norm_is_one", "single_orbit", "image_smooth",
        "operator_smooth",
    ],
}


def _config(**overrides) -> RunConfig:
    return RunConfig(**{"seed": 0, "starts": 16, "timestamps": False, **overrides})


@pytest.fixture(scope="module")
def all_results() -> dict[str, SuiteResult]:
    """Every suite once, at small sizes."""
    service = VerificationService(_config(), SMALL)
    return {result.suite: result for result in service.run(ALL_SUITES)}


def _verdicts(result: SuiteResult) -> dict[str, Verdict]:
    return {record.check: record.verdict for record in result.records}


# ---------------------------------------------------------------------------
# Tallies and results
# ---------------------------------------------------------------------------


class TestAgreement:
    """Two routes compared instance by instance."""

    def test_counts(self):
        tally = Agreement()
        tally.compare(Verdict.HOLDS, Verdict.HOLDS)
        tally.compare(Verdict.FAILS, Verdict.FAILS)
        tally.compare(Verdict.INCONCLUSIVE, Verdict.FAILS)
        assert tally.to_dict() == {"agree": 2, "disagree": 0, "marginal": 1}
        assert tally.decision().is_holds

    def test_first_disagreement_kept(self):
        tally = Agreement()
        tally.compare(Verdict.HOLDS, Verdict.FAILS, instance=1)
        tally.compare(Verdict.FAILS, Verdict.HOLDS, instance=2)
        assert tally.disagree == 2
        assert tally.first_disagreement == {"left": "holds", "right": "fails", "instance": 1}
        assert tally.decision().is_fails


class TestSuiteResult:
    def _result(self, *verdicts: Verdict) -> SuiteResult:
        records = [
            CheckRecord(check=f"c{k}", claim="claim", verdict=v)
            for k, v in enumerate(verdicts)
        ]
        return SuiteResult("definitions", records, duration_s=0.12345)

    def test_counts(self):
        result = self._result(Verdict.HOLDS, Verdict.INCONCLUSIVE, Verdict.HOLDS)
        assert result.counts() == {"holds": 2, "fails": 0, "inconclusive": 1}

    def test_passed(self):
        result = self._result(Verdict.HOLDS, Verdict.INCONCLUSIVE)
        assert result.passed()
        assert not result.passed(strict=True)
        assert not self._result(Verdict.FAILS).passed()

    def test_to_dict(self):
        assert self._result(Verdict.HOLDS).to_dict() == {
            "suite": "definitions",
            "checks": 1,
            "holds": 1,
            "fails": 0,
            "inconclusive": 0,
            "duration_s": 0.123,
        }


# ---------------------------------------------------------------------------
# Service
# ---------------------------------------------------------------------------


class TestVerificationService:
    """Suite dispatch, seeding and error handling."""

    def test_unknown_suite(self):
        with pytest.raises(UnknownSuite):
            VerificationService(_config(), SMALL).run("nonsense")

    def test_all_runs_every_suite_in_order(self, all_results):
        assert tuple(all_results) == SUITES

    @pytest.mark.parametrize("suite", SUITES)
    def test_check_names(self, all_results, suite):
        assert [r.check for r in all_results[suite].records] == EXPECTED_CHECKS[suite]

    def test_records_tagged_with_suite(self, all_results):
        for name, result in all_results.items():
            assert all(record.suite == name for record in result.records)
            assert all(record.timestamp is None for record in result.records)

    def test_checks_independent_of_suite_selection(self, all_results):
        alone = VerificationService(_config(), SMALL).run("smooth-product")[0]
        assert [r.to_json_line(False) for r in alone.records] == [
            r.to_json_line(False) for r in all_results["smooth-product"].records
        ]

    def test_reproducible(self):
        first = VerificationService(_config(seed=3), SMALL).run("definitions")[0]
        second = VerificationService(_config(seed=3), SMALL).run("definitions")[0]
        assert [r.to_json_line(False) for r in first.records] == [
            r.to_json_line(False) for r in second.records
        ]

    def test_alias_runs_smooth_example(self, all_results):
        result = VerificationService(_config(), SMALL).run("paper-example")[0]
        assert result.suite == "paper-example"
        assert all(record.suite == "paper-example" for record in result.records)
        assert [r.check for r in result.records] == EXPECTED_CHECKS["smooth-example"]
        assert result.counts() == all_results["smooth-example"].counts()

    def test_timestamps(self):
        result = VerificationService(_config(timestamps=True), SMALL).run("smooth-example")[0]
        assert all(record.timestamp is not None for record in result.records)

    def test_domain_error_becomes_failure(self):
        service = VerificationService(_config(), SMALL)

        def explode(rng) -> Decision:
            raise ZeroAnchor(0.0)

        record = service._run_check("definitions", ("explode", "claim", explode))
        assert record.verdict is Verdict.FAILS
        assert record.witnesses["reason"].startswith("ZeroAnchor:")


# ---------------------------------------------------------------------------
# Suite outcomes
# ---------------------------------------------------------------------------


class TestSuiteOutcomes:
    """Deterministic checks hold at small sizes."""

    def test_definitions(self, all_results):
        verdicts = _verdicts(all_results["definitions"])
        assert verdicts["sip_axioms"] is Verdict.HOLDS
        assert verdicts["smooth_sip_unique"] is Verdict.HOLDS
        assert verdicts["bj_derivative_vs_oracle"] is not Verdict.FAILS

    def test_product_props(self, all_results):
        verdicts = _verdicts(all_results["product-props"])
        assert verdicts["closed_form_vs_product_support"] is Verdict.HOLDS

    def test_smooth_product(self, all_results):
        assert all_results["smooth-product"].passed(strict=True)

    def test_bilinear_core(self, all_results):
        verdicts = _verdicts(all_results["bilinear-core"])
        assert verdicts["bilinearity"] is Verdict.HOLDS
        assert verdicts["attainment_not_smooth"] is Verdict.HOLDS
        assert verdicts["linear_attains_at_smooth"] is Verdict.HOLDS

    def test_operator_orth(self, all_results):
        verdicts = _verdicts(all_results["operator-orth"])
        assert verdicts["self_orthogonality_fails"] is Verdict.HOLDS
        homogeneity = next(
            r for r in all_results["operator-orth"].records if r.check == "verdicts_homogeneous"
        )
        assert set(homogeneity.witnesses) == {"direct_route", "witness_route"}
        assert homogeneity.witnesses["direct_route"]["disagree"] == 0

    def test_operator_smooth(self, all_results):
        assert all_results["operator-smooth"].passed(strict=True)

    def test_sip_theorem(self, all_results):
        verdicts = _verdicts(all_results["sip-theorem"])
        assert verdicts["sip_identity_nonsmooth_search"] is Verdict.HOLDS
        assert verdicts["sip_identity_off_attainment"] is Verdict.HOLDS

    def test_smooth_example(self, all_results):
        result = all_results["smooth-example"]
        assert result.passed(strict=True)
        assert result.counts()["holds"] == 5


@pytest.mark.slow
class TestFullSizeSuites:
    """Default instance counts; run with ``pytest -m slow``."""

    @pytest.mark.parametrize("suite", ["definitions", "smooth-product", "operator-smooth"])
    def test_suite_passes(self, suite):
        result = VerificationService(_config(starts=64)).run(suite)[0]
        assert result.passed()
