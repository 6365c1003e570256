"""Pass/fail reports: one row per assertion, emitted as JSON or CSV."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

SIG = 12


def fmt(v) -> str:
    """12 significant digits, '.' as decimal separator, lists joined by ';'."""
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(fmt(x) for x in v)
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, float, np.integer, np.floating)):
        return f"{float(v):.{SIG}g}"
    return "" if v is None else str(v)


def _round(v):
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_round(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(f"{float(v):.{SIG}g}")
    return v


@dataclass
class Case:
    """One assertion.  ``relation`` reads "actual <relation> expected"."""

    id: str
    expected: object
    actual: object
    tol: float
    provenance: str
    passed: bool
    relation: str = "=="

    def to_dict(self) -> dict:
        return {"id": self.id, "expected": _round(self.expected), "actual": _round(self.actual),
                "tol": _round(self.tol), "provenance": self.provenance, "pass": bool(self.passed),
                "relation": self.relation}


def eq(id, expected, actual, tol, provenance) -> Case:
    ok = bool(np.all(np.abs(np.asarray(actual, float) - np.asarray(expected, float)) <= tol))
    return Case(id, expected, actual, tol, provenance, ok, "==")


def le(id, actual, bound, tol, provenance) -> Case:
    return Case(id, bound, actual, tol, provenance, bool(actual <= bound + tol), "<=")


def ge(id, actual, bound, tol, provenance) -> Case:
    return Case(id, bound, actual, tol, provenance, bool(actual >= bound - tol), ">=")


def within(id, actual, lo, hi, provenance) -> Case:
    return Case(id, [lo, hi], actual, 0.0, provenance, bool(lo <= actual <= hi), "in")


def holds(id, flag, provenance, actual=None) -> Case:
    return Case(id, True, flag if actual is None else actual, 0.0, provenance, bool(flag), "is")


@dataclass
class Report:
    suite: str
    cases: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def add(self, case: Case) -> Case:
        self.cases.append(case)
        return case

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def failures(self) -> list:
        return [c for c in self.cases if not c.passed]

    def to_dict(self) -> dict:
        out = {"suite": self.suite, "cases": [c.to_dict() for c in self.cases]}
        if self.extras:
            out["extras"] = _round_tree(self.extras)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(CSV_FIELDS)
        for c in self.cases:
            w.writerow(_csv_row(self.suite, c))
        return buf.getvalue()


CSV_FIELDS = ["suite", "id", "relation", "expected", "actual", "tol", "provenance", "pass"]


def _csv_row(suite: str, c: Case) -> list:
    return [suite, c.id, c.relation, fmt(c.expected), fmt(c.actual), fmt(c.tol), c.provenance,
            fmt(c.passed)]


def _round_tree(v):
    if isinstance(v, dict):
        return {k: _round_tree(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_round_tree(x) for x in v]
    return _round(v)


def bundle_json(reports: list) -> str:
    return json.dumps({"reports": [r.to_dict() for r in reports]}, indent=2)


def bundle_csv(reports: list) -> str:
    return "".join(r.to_csv(header=(i == 0)) for i, r in enumerate(reports))
