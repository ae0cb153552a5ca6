"""Residual tables shared by the verification routines."""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class ResidualRow:
    label: str
    estimate: float
    target: float
    tolerance: float
    note: str = ""

    @property
    def residual(self) -> float:
        return abs(self.estimate - self.target)

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def to_dict(self) -> dict:
        d = asdict(self)
        d["residual"] = self.residual
        d["passed"] = self.passed
        return d


def all_passed(rows) -> bool:
    return all(r.passed for r in rows)


def max_residual(rows) -> float:
    return max((r.residual for r in rows), default=0.0)
