"""Bound reports and aggregated check results."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

SCHEMA_VERSION = 1


@dataclass(slots=True)
class BoundReport:
    """Worst measured update against its bound over a set of perturbation trials."""

    measured_update: float
    theoretical_bound: float
    ratio: float
    eta: float
    per_term: list[float] = field(default_factory=list)
    trials: int = 0
    label: str = ""

    @classmethod
    def from_measurement(
        cls,
        measured: float,
        bound: float,
        *,
        eta: float,
        per_term: list[float],
        trials: int,
        label: str = "",
    ) -> BoundReport:
        if measured == 0.0:
            ratio = 0.0
        elif bound > 0.0:
            ratio = measured / bound
        else:
            ratio = math.inf
        return cls(
            measured_update=measured,
            theoretical_bound=bound,
            ratio=ratio,
            eta=eta,
            per_term=per_term,
            trials=trials,
            label=label,
        )

    def passed(self, tolerance: float) -> bool:
        return self.ratio <= tolerance

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "eta": self.eta,
            "trials": self.trials,
            "measured_update": self.measured_update,
            "theoretical_bound": self.theoretical_bound,
            "ratio": self.ratio,
            "per_term": list(self.per_term),
        }


@dataclass(slots=True)
class CheckResult:
    """One named verification check."""

    name: str
    passed: bool
    message: str | None = None
    details: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {"name": self.name, "passed": self.passed}
        if self.message is not None:
            payload["message"] = self.message
        if self.details:
            payload["details"] = dict(self.details)
        return payload


@dataclass(slots=True, frozen=True)
class CheckSummary:
    total: int
    passed: int
    failed: int

    def to_dict(self) -> dict[str, int]:
        return {"total": self.total, "passed": self.passed, "failed": self.failed}


@dataclass(slots=True)
class SuiteReport:
    """Aggregated outcome of a verification suite."""

    suite: str
    checks: list[CheckResult]
    elapsed_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def summary(self) -> CheckSummary:
        passed = sum(1 for check in self.checks if check.passed)
        return CheckSummary(total=len(self.checks), passed=passed, failed=len(self.checks) - passed)

    def to_dict(self, *, include_timing: bool = True) -> dict[str, Any]:
        """JSON payload; without timing it is byte-stable across identical runs."""
        payload: dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "passed": self.passed,
            "summary": self.summary.to_dict(),
            "checks": [check.to_dict() for check in self.checks],
        }
        if include_timing:
            payload["elapsed_ms"] = max(0.0, float(self.elapsed_ms))
        return payload
