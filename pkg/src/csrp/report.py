"""Named residual checks collected into a report."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
        }


@dataclass
class ValidationReport:
    """Ordered list of checks; the report passes iff every check passes.

    Positivity-type checks are recorded with ``residual = -margin`` so that the
    uniform rule ``residual <= tolerance`` applies to them as well.
    """

    title: str = ""
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, residual: float, tolerance: float) -> Check:
        check = Check(name, float(residual), float(tolerance))
        self.checks.append(check)
        return check

    def add_positive(self, name: str, margin: float, min_margin: float = 0.0) -> Check:
        """Record a strict-positivity check: passes iff ``margin > min_margin``."""
        tol = -min_margin if min_margin > 0 else -5e-324
        return self.add(name, -float(margin), tol)

    def extend(self, other: "ValidationReport", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.residual, c.tolerance))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __iter__(self) -> Iterator[Check]:
        return iter(self.checks)

    def __len__(self) -> int:
        return len(self.checks)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "pass": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }

    def __str__(self) -> str:
        lines = [f"{self.title or 'report'}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            flag = "ok " if c.passed else "BAD"
            lines.append(f"  [{flag}] {c.name}: residual={c.residual:.3e} tol={c.tolerance:.1e}")
        return "\n".join(lines)
