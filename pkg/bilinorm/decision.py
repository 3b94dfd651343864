"""Tri-state verdicts returned by every decision procedure."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Optional


class Verdict(Enum):
    """Outcome of a decision procedure."""

    HOLDS = "holds"
    """The property holds; witnesses certify it where available."""

    FAILS = "fails"
    """The property fails; witnesses hold a counterexample where available."""

    INCONCLUSIVE = "inconclusive"
    """The instance sits inside the marginal band of the tolerances, or the
    computation behind it cannot be certified (heuristic maximisation)."""


@dataclass(frozen=True)
class Decision:
    """A verdict together with its numeric witnesses or certificates."""

    verdict: Verdict
    witnesses: dict[str, Any] = field(default_factory=dict)
    reason: Optional[str] = None

    @classmethod
    def holds(cls, reason: Optional[str] = None, **witnesses: Any) -> "Decision":
        return cls(Verdict.HOLDS, dict(witnesses), reason)

    @classmethod
    def fails(cls, reason: Optional[str] = None, **witnesses: Any) -> "Decision":
        return cls(Verdict.FAILS, dict(witnesses), reason)

    @classmethod
    def inconclusive(
        cls, reason: Optional[str] = None, **witnesses: Any
    ) -> "Decision":
        return cls(Verdict.INCONCLUSIVE, dict(witnesses), reason)

    @classmethod
    def from_bool(cls, value: bool, reason: Optional[str] = None, **witnesses: Any):
        return cls(Verdict.HOLDS if value else Verdict.FAILS, dict(witnesses), reason)

    @property
    def is_holds(self) -> bool:
        return self.verdict is Verdict.HOLDS

    @property
    def is_fails(self) -> bool:
        return self.verdict is Verdict.FAILS

    @property
    def is_inconclusive(self) -> bool:
        return self.verdict is Verdict.INCONCLUSIVE

    def to_dict(self) -> dict[str, Any]:
        """Convert to a JSON-ready dictionary."""
        data: dict[str, Any] = {"verdict": self.verdict.value}
        if self.reason:
            data["reason"] = self.reason
        if self.witnesses:
            data["witnesses"] = to_jsonable(self.witnesses)
        return data


def all_of(decisions: Iterable[Decision]) -> Verdict:
    """Kleene conjunction: any failure wins, then any inconclusive."""
    verdicts = [d.verdict for d in decisions]
    if Verdict.FAILS in verdicts:
        return Verdict.FAILS
    if Verdict.INCONCLUSIVE in verdicts:
        return Verdict.INCONCLUSIVE
    return Verdict.HOLDS


def any_of(decisions: Iterable[Decision]) -> Verdict:
    """Kleene disjunction: any success wins, then any inconclusive."""
    verdicts = [d.verdict for d in decisions]
    if Verdict.HOLDS in verdicts:
        return Verdict.HOLDS
    if Verdict.INCONCLUSIVE in verdicts:
        return Verdict.INCONCLUSIVE
    return Verdict.FAILS


def to_jsonable(value: Any) -> Any:
    """Turn numpy arrays and scalars nested in witnesses into plain Python."""
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, Decision):
        return value.to_dict()
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value
