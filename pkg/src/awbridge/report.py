"""Pass/fail records shared by the diagnostic helpers and ``verify``."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.name}: measured={self.value:.3e} tol={self.tol:.1e}"
        if self.detail:
            text += f" ({self.detail})"
        return text


def check_le(name: str, value: float, tol: float, detail: str = "") -> Check:
    """Build a check that passes when ``value <= tol`` (NaN fails)."""
    value = float(value)
    return Check(name, value, float(tol), bool(value <= tol), detail)


@dataclass
class Report:
    title: str
    checks: list[Check] = field(default_factory=list)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

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

    def format(self) -> str:
        lines = [f"== {self.title} =="]
        lines.extend(c.line() for c in self.checks)
        return "\n".join(lines)
