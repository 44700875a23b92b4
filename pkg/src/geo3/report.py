"""Structured verification outcomes shared by the library and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

SCHEMA = "geo3.report/1"


def component_label(name: str, idx: Iterable[int], coords: Iterable[str]) -> str:
    coords = list(coords)
    return f"{name}[{','.join(coords[i] for i in idx)}]"


@dataclass
class Check:
    id: str
    status: str
    residuals: dict[str, str] = field(default_factory=dict)
    numeric_errors: dict[str, float] = field(default_factory=dict)
    detail: str = ""
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.status not in ("pass", "fail"):
            raise ValueError(f"bad status {self.status!r}")

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "status": self.status,
            "residuals": dict(self.residuals),
            "numeric-errors": {k: float(v) for k, v in self.numeric_errors.items()},
        }
        if self.detail:
            out["detail"] = self.detail
        if self.warnings:
            out["warnings"] = list(self.warnings)
        return out


@dataclass
class Report:
    command: str = ""
    inputs: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)

    def add(self, id: str, ok: bool, residuals=None, numeric_errors=None, detail: str = "", warnings=None) -> Check:
        check = Check(
            id,
            "pass" if ok else "fail",
            dict(residuals or {}),
            dict(numeric_errors or {}),
            detail,
            list(warnings or []),
        )
        self.checks.append(check)
        return check

    def extend(self, other: "Report", prefix: str = "") -> "Report":
        for c in other.checks:
            self.checks.append(Check(prefix + c.id, c.status, c.residuals, c.numeric_errors, c.detail, c.warnings))
        return self

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def sorted(self) -> "Report":
        return Report(self.command, dict(self.inputs), sorted(self.checks, key=lambda c: c.id))

    def to_dict(self, wall_time: float | None = None) -> dict:
        return {
            "schema": SCHEMA,
            "command": self.command,
            "inputs": self.inputs,
            "checks": [c.to_dict() for c in sorted(self.checks, key=lambda c: c.id)],
            "wall-time": wall_time,
        }

    def render(self) -> str:
        lines = []
        for c in sorted(self.checks, key=lambda c: c.id):
            line = f"[{c.status.upper()}] {c.id}"
            if c.detail:
                line += f": {c.detail}"
            lines.append(line)
            for k, v in c.residuals.items():
                lines.append(f"    {k} = {v}")
            for k, v in c.numeric_errors.items():
                lines.append(f"    {k}: {v:.3e}")
            for w in c.warnings:
                lines.append(f"    warning: {w}")
        n_fail = len(self.failures())
        lines.append(f"{len(self.checks) - n_fail}/{len(self.checks)} checks passed")
        return "\n".join(lines)
