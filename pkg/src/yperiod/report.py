"""Check counters and violation records."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any

from . import scalar


@dataclass
class Counter:
    checked: int = 0
    passed: int = 0
    failed: int = 0

    def add(self, other: "Counter") -> None:
        self.checked += other.checked
        self.passed += other.passed
        self.failed += other.failed


def _encode(value: Any) -> Any:
    if isinstance(value, Fraction):
        return scalar.to_json(value)
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    if isinstance(value, dict):
        return {k: _encode(v) for k, v in value.items()}
    return value


@dataclass
class Violation:
    check: str
    shape: str
    where: Any
    expected: Any = None
    actual: Any = None

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "shape": self.shape,
            "where": _encode(self.where),
            "expected": _encode(self.expected),
            "actual": _encode(self.actual),
        }


@dataclass
class Report:
    """Per-check, per-shape counters plus violations and trial metadata.

    Reports merge associatively, so trials can run anywhere and be folded
    together afterwards in a fixed order.
    """

    counters: dict[tuple[str, str], Counter] = field(default_factory=dict)
    violations: list[Violation] = field(default_factory=list)
    trials: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    # wall time is the one nondeterministic part; kept apart so reports compare equal
    timings: list[dict] = field(default_factory=list)

    def counter(self, check: str, shape) -> Counter:
        return self.counters.setdefault((check, str(shape)), Counter())

    def record(self, check: str, shape, ok: bool, where=None, expected=None, actual=None) -> bool:
        c = self.counter(check, shape)
        c.checked += 1
        if ok:
            c.passed += 1
        else:
            c.failed += 1
            self.violations.append(Violation(check, str(shape), where, expected, actual))
        return ok

    def merge(self, other: "Report") -> "Report":
        for key, c in other.counters.items():
            self.counters.setdefault(key, Counter()).add(c)
        self.violations.extend(other.violations)
        self.trials.extend(other.trials)
        self.notes.extend(n for n in other.notes if n not in self.notes)
        self.timings.extend(other.timings)
        return self

    @property
    def checked(self) -> int:
        return sum(c.checked for c in self.counters.values())

    @property
    def failed(self) -> int:
        return sum(c.failed for c in self.counters.values())

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def total(self, check: str) -> Counter:
        out = Counter()
        for (name, _), c in self.counters.items():
            if name == check:
                out.add(c)
        return out

    def to_dict(self, timings: bool = True) -> dict:
        out = {
            "counters": [
                {"check": check, "shape": shape, **asdict(c)}
                for (check, shape), c in sorted(self.counters.items())
            ],
            "violations": [v.to_dict() for v in self.violations],
            "trials": self.trials,
            "notes": self.notes,
        }
        if timings:
            out["timings"] = self.timings
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        rep = cls()
        for row in data.get("counters", []):
            rep.counters[(row["check"], row["shape"])] = Counter(
                row["checked"], row["passed"], row["failed"]
            )
        for v in data.get("violations", []):
            rep.violations.append(
                Violation(v["check"], v["shape"], v["where"], v.get("expected"), v.get("actual"))
            )
        rep.trials = list(data.get("trials", []))
        rep.notes = list(data.get("notes", []))
        rep.timings = list(data.get("timings", []))
        return rep

    def summary_lines(self) -> list[str]:
        lines = []
        for (check, shape), c in sorted(self.counters.items()):
            status = "PASS" if c.failed == 0 else "FAIL"
            lines.append(f"{status} {check:<18} {shape:<7} checked={c.checked} failed={c.failed}")
        return lines
