"""Verification reports shared by every suite, with text and JSON rendering."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

STATUSES = ("pass", "fail", "flagged")


@dataclass
class Item:
    label: str
    anchor: str
    status: str
    residual: str = ""
    note: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}, got {self.status!r}")

    @property
    def passed(self) -> bool:
        return self.status != "fail"


@dataclass
class SuiteReport:
    suite: str
    items: list[Item] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    schema_hashes: dict = field(default_factory=dict)
    timing: float | None = None  # seconds; only rendered in JSON
    tables: dict = field(default_factory=dict)  # label -> rows (exponent, monomial, lhs, rhs, match)

    @property
    def ok(self) -> bool:
        return all(i.passed for i in self.items)

    def failures(self) -> list[Item]:
        return [i for i in self.items if i.status == "fail"]

    def extend(self, other: "SuiteReport") -> "SuiteReport":
        self.items.extend(other.items)
        self.schema_hashes.update(other.schema_hashes)
        self.tables.update(other.tables)
        return self

    def counts(self) -> dict[str, int]:
        return {s: sum(1 for i in self.items if i.status == s) for s in STATUSES}

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "ok": self.ok,
            "counts": self.counts(),
            "config": self.config,
            "schema_hashes": dict(sorted(self.schema_hashes.items())),
            "timing": self.timing,
            "items": [asdict(i) for i in self.items],
            "tables": {k: [_row(r) for r in rows] for k, rows in self.tables.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteReport":
        tables = {k: [(r["exponent"], r["monomial"], r["lhs"], r["rhs"], r["match"]) for r in rows]
                  for k, rows in d.get("tables", {}).items()}
        return cls(d["suite"], [Item(**i) for i in d["items"]], d.get("config", {}), d.get("schema_hashes", {}),
                   d.get("timing"), tables)


def _row(r) -> dict:
    e, m, x, y, ok = r
    return {"exponent": str(e), "monomial": str(m), "lhs": str(x), "rhs": str(y), "match": bool(ok)}


def render(report: SuiteReport, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=False) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    lines = [f"suite: {report.suite}"]
    if report.config:
        lines.append("config: " + ", ".join(f"{k}={report.config[k]}" for k in sorted(report.config)))
    for name, h in sorted(report.schema_hashes.items()):
        lines.append(f"schema {name}: {h}")
    for it in report.items:
        lines.append(f"[{it.status.upper():7}] {it.label}  <{it.anchor}>")
        if it.residual:
            lines.append(f"          residual: {it.residual}")
        if it.note:
            lines.append(f"          note: {it.note}")
    c = report.counts()
    for label, rows in report.tables.items():
        lines.append(f"table: {label}")
        lines.append(f"  {'exponent':>9}  {'monomial':<12} {'lhs':>10} {'rhs':>10}  match")
        for e, m, x, y, ok in rows:
            lines.append(f"  {str(e):>9}  {str(m):<12} {str(x):>10} {str(y):>10}  {'yes' if ok else 'NO'}")
    lines.append(f"{c['pass']} passed, {c['fail']} failed, {c['flagged']} flagged")
    return "\n".join(lines) + "\n"
