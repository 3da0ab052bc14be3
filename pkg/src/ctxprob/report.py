"""Check results with deterministic text and JSON-lines rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

PASS = "pass"
FAIL = "fail"
SKIP = "skip"
INFO = "info"


def _jsonable(value):
    """Normalize witnesses to JSON-stable structures."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in sorted(value.items(), key=lambda kv: str(kv[0]))}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted(_jsonable(v) for v in value)
    return str(value)


@dataclass
class CheckResult:
    """One named verification outcome, optionally with witness and gap."""

    name: str
    status: str
    detail: str = ""
    witness: object = None
    gap: object = None
    tolerance: object = None

    def to_dict(self) -> dict:
        return {
            "check": self.name,
            "status": self.status,
            "detail": self.detail,
            "witness": _jsonable(self.witness),
            "gap": None if self.gap is None else float(self.gap),
            "tolerance": None if self.tolerance is None else float(self.tolerance),
        }


@dataclass
class Report:
    title: str
    entries: list[CheckResult] = field(default_factory=list)

    def add(self, *args, **kwargs) -> CheckResult:
        entry = CheckResult(*args, **kwargs)
        self.entries.append(entry)
        return entry

    def extend(self, other: "Report", prefix: str = "") -> None:
        for entry in other.entries:
            renamed = CheckResult(
                name=f"{prefix}{entry.name}" if prefix else entry.name,
                status=entry.status,
                detail=entry.detail,
                witness=entry.witness,
                gap=entry.gap,
                tolerance=entry.tolerance,
            )
            self.entries.append(renamed)

    @property
    def passed(self) -> bool:
        return all(e.status != FAIL for e in self.entries)

    def failures(self) -> list[CheckResult]:
        return [e for e in self.entries if e.status == FAIL]

    def counts(self) -> dict[str, int]:
        out = {PASS: 0, FAIL: 0, SKIP: 0, INFO: 0}
        for e in self.entries:
            out[e.status] = out.get(e.status, 0) + 1
        return out

    def render_text(self) -> str:
        lines = [f"== {self.title} =="]
        for e in self.entries:
            line = f"[{e.status.upper():>4}] {e.name}"
            if e.detail:
                line += f": {e.detail}"
            extras = []
            if e.witness is not None:
                extras.append(f"witness={_jsonable(e.witness)}")
            if e.gap is not None:
                extras.append(f"gap={float(e.gap):.9g}")
            if e.tolerance is not None:
                extras.append(f"tol={float(e.tolerance):.9g}")
            if extras:
                line += "  (" + ", ".join(extras) + ")"
            lines.append(line)
        c = self.counts()
        lines.append(
            f"-- {self.title}: {c[PASS]} passed, {c[FAIL]} failed, "
            f"{c[SKIP]} skipped, {c[INFO]} info"
        )
        return "\n".join(lines)

    def to_json_lines(self) -> str:
        lines = []
        for e in self.entries:
            doc = {"report": self.title}
            doc.update(e.to_dict())
            lines.append(json.dumps(doc, sort_keys=True, separators=(",", ":")))
        summary = {"report": self.title, "summary": self.counts(), "passed": self.passed}
        lines.append(json.dumps(summary, sort_keys=True, separators=(",", ":")))
        return "\n".join(lines)
