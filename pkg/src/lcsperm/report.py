from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any


@dataclass
class VerificationReport:
    """Outcome of checking one claim at one degree.

    ``mode`` is "exhaustive" (a finite proof at this n when violations == 0)
    or "sampled" (only the absence of a found counterexample). ``witness``
    holds the case with the least slack, or the first discrepancy for
    structural checks.
    """

    n: int
    claim: str
    mode: str
    cases: int
    violations: int
    witness: Any = None
    slack: float | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    @property
    def verified(self) -> bool:
        return self.passed and self.mode == "exhaustive"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        d["verified"] = self.verified
        return d
