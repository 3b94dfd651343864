"""Tests for tri-state verdicts and their combinators."""

from enum import Enum

import numpy as np

from bilinorm.decision import Decision, Verdict, all_of, any_of, to_jsonable

H, F, I = Decision.holds(), Decision.fails(), Decision.inconclusive()


class TestDecision:
    def test_constructors(self):
        assert H.is_holds
        assert F.is_fails
        assert I.is_inconclusive

    def test_from_bool(self):
        assert Decision.from_bool(True).verdict is Verdict.HOLDS
        assert Decision.from_bool(False, "nope", k=1).witnesses == {"k": 1}

    def test_to_dict(self):
        decision = Decision.fails("counterexample", x=np.array([1.0, 2.0]))
        assert decision.to_dict() == {
            "verdict": "fails",
            "reason": "counterexample",
            "witnesses": {"x": [1.0, 2.0]},
        }

    def test_to_dict_minimal(self):
        assert H.to_dict() == {"verdict": "holds"}


class TestCombinators:
    """Kleene conjunction and disjunction."""

    def test_all_of(self):
        assert all_of([H, H]) is Verdict.HOLDS
        assert all_of([H, I]) is Verdict.INCONCLUSIVE
        assert all_of([I, F]) is Verdict.FAILS
        assert all_of([]) is Verdict.HOLDS

    def test_any_of(self):
        assert any_of([F, H]) is Verdict.HOLDS
        assert any_of([F, I]) is Verdict.INCONCLUSIVE
        assert any_of([F, F]) is Verdict.FAILS
        assert any_of([]) is Verdict.FAILS


class TestToJsonable:
    def test_nested(self):
        class Colour(Enum):
            RED = "red"

        value = {
            1: (np.float64(0.5), [np.int64(3)]),
            "verdict": Verdict.HOLDS,
            "decision": Decision.holds(n=2),
            "colour": Colour.RED,
        }
        assert to_jsonable(value) == {
            "1": [0.5, [3]],
            "verdict": "holds",
            "decision": {"verdict": "holds", "witnesses": {"n": 2}},
            "colour": "red",
        }
