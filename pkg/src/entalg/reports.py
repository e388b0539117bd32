"""Machine-readable check reports shared by the verification modules."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CheckReport:
    """Outcome of one verification pass.

    ``violations`` is empty on success; each entry is a small dict with a
    witness (word, labels, values) for the failed identity.  Deviation is
    None for purely symbolic checks and a float for oracle comparisons.
    """

    check: str
    parameters: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    max_deviation: float | None = None

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "parameters": self.parameters,
            "counts": self.counts,
            "violations": self.violations,
            "max_deviation": self.max_deviation,
            "passed": self.passed,
        }
