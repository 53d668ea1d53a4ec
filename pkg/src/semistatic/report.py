"""Pass/fail check records and their CSV/JSON rendering."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction


def _cell(value):
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, bool):
        return "true" if value else "false"
    return value


@dataclass
class Check:
    """One verified identity or bound.

    ``hard`` checks decide the overall verdict; soft ones are informational
    (e.g. a conjectured constant that is reported but not asserted).
    """

    name: str
    passed: bool
    value: object = None
    target: object = None
    hard: bool = True
    detail: str = ""


@dataclass
class Report:
    title: str
    checks: list = field(default_factory=list)

    def add(self, name, passed, value=None, target=None, *, hard=True, detail="") -> Check:
        check = Check(name, bool(passed), value, target, hard, detail)
        self.checks.append(check)
        return check

    def extend(self, other: "Report", prefix: str = ""):
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.passed, c.value, c.target, c.hard, c.detail))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.hard)

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list:
        return [c for c in self.checks if c.hard and not c.passed]

    def rows(self) -> list:
        return [{k: _cell(v) for k, v in asdict(c).items()} for c in self.checks]

    def to_csv(self) -> str:
        return rows_to_csv(self.rows(), ["name", "passed", "value", "target", "hard", "detail"])

    def to_json(self) -> str:
        return json.dumps({"title": self.title, "passed": self.passed, "checks": self.rows()}, indent=2)

    def summary(self) -> str:
        lines = [f"{self.title}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            flag = "ok " if c.passed else ("FAIL" if c.hard else "no ")
            lines.append(f"  [{flag}] {c.name}" + (f"  ({_cell(c.value)} vs {_cell(c.target)})" if c.target is not None else ""))
        return "\n".join(lines)


def rows_to_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(row.get(k)) for k in columns})
    return buf.getvalue()
