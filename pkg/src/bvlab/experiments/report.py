"""Scenario configuration, checks, reports and their serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .. import io


@dataclass
class ScenarioConfig:
    scenario: str
    domain: dict = field(default_factory=dict)
    meshes: list = field(default_factory=list)
    fixtures: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        from .scenarios import SCENARIOS

        if self.scenario not in SCENARIOS:
            raise KeyError(f"unknown scenario {self.scenario!r}; see `lab list`")
        base = SCENARIOS[self.scenario].defaults
        self.domain = {**base.get("domain", {}), **self.domain}
        self.meshes = [float(h) for h in (self.meshes or base.get("meshes", []))]
        self.fixtures = list(self.fixtures or base.get("fixtures", []))
        self.tolerances = {**base.get("tolerances", {}), **self.tolerances}
        self.options = {**base.get("options", {}), **self.options}
        if base.get("meshes") and not self.meshes:
            raise ValueError("mesh sweep must be nonempty")

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = {"scenario", "domain", "meshes", "fixtures", "tolerances", "options", "seed", "out"}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path, **overrides) -> "ScenarioConfig":
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
        d.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(d)

    def as_dict(self) -> dict:
        return {"scenario": self.scenario, "domain": self.domain, "meshes": self.meshes,
                "fixtures": self.fixtures, "tolerances": self.tolerances, "options": self.options,
                "seed": self.seed}


@dataclass(frozen=True)
class Check:
    """One asserted relation ``lhs <rel> rhs`` with both sides recorded.

    ``rel`` is one of "<=", "<", ">=", ">", "in" (rhs = [lo, hi]) or
    "increasing" / "decreasing" (lhs is a sequence, rhs unused).
    """

    name: str
    lhs: object
    rel: str
    rhs: object = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return evaluate(self.lhs, self.rel, self.rhs)

    def as_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rel": self.rel, "rhs": self.rhs,
                "note": self.note, "passed": self.passed}


def evaluate(lhs, rel, rhs) -> bool:
    if rel == "increasing":
        return all(b > a for a, b in zip(lhs, lhs[1:]))
    if rel == "decreasing":
        return all(b < a for a, b in zip(lhs, lhs[1:]))
    if isinstance(lhs, float) and math.isnan(lhs):
        return False
    if rel == "in":
        lo, hi = rhs
        return lo <= lhs <= hi
    return {"<=": lhs <= rhs, "<": lhs < rhs, ">=": lhs >= rhs, ">": lhs > rhs}[rel]


@dataclass
class ScenarioReport:
    scenario: str
    config: dict
    constants: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)   # name -> (header, rows)
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add_table(self, name, header, rows):
        self.tables[name] = (tuple(header), [tuple(r) for r in rows])

    def check(self, name, lhs, rel, rhs=None, note="") -> Check:
        c = Check(name, io._plain(lhs), rel, io._plain(rhs), note)
        self.checks.append(c)
        return c

    def payload(self) -> dict:
        """Data content without timing; byte-stable for a fixed configuration."""
        return {
            "scenario": self.scenario, "config": self.config, "constants": self.constants,
            "tables": {k: {"header": list(h), "rows": [list(r) for r in rows]}
                       for k, (h, rows) in sorted(self.tables.items())},
            "checks": [c.as_dict() for c in self.checks], "notes": self.notes,
            "passed": self.passed,
        }

    def summary_lines(self):
        for c in self.checks:
            yield f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {_fmt(c.lhs)} {c.rel} {_fmt(c.rhs)}"


def reverify(payload: dict) -> list:
    """Recompute verdicts from saved checks."""
    return [evaluate(c["lhs"], c["rel"], c["rhs"]) for c in payload["checks"]]


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6g}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return str(x)


def emit_report(report: ScenarioReport, fmt: str, out_dir) -> list:
    """Write the report as json, csv or md under ``out_dir``; returns written paths.

    Data files carry no timing; the wall time goes to ``timing.json``.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    paths = []
    if fmt == "json":
        paths.append(io.write_json(out / f"{report.scenario}.json", report.payload()))
    elif fmt == "csv":
        for name, (header, rows) in sorted(report.tables.items()):
            paths.append(io.write_csv(out / f"{name}.csv", rows, header))
        paths.append(io.write_csv(out / "checks.csv",
                                  [(c.name, _fmt(c.lhs), c.rel, _fmt(c.rhs), c.passed) for c in report.checks],
                                  ("check", "lhs", "rel", "rhs", "passed")))
    elif fmt == "md":
        lines = [f"# {report.scenario}", ""]
        for c in report.checks:
            lines += [f"## {c.name}", "", "| lhs | relation | rhs | verdict |", "|---|---|---|---|",
                      f"| {_fmt(c.lhs)} | {c.rel} | {_fmt(c.rhs)} | {'pass' if c.passed else 'FAIL'} |", ""]
            if c.note:
                lines += [c.note, ""]
        if report.constants:
            lines += ["## measured constants", "", "| name | value |", "|---|---|"]
            lines += [f"| {k} | {_fmt(v)} |" for k, v in sorted(report.constants.items())]
            lines.append("")
        path = out / f"{report.scenario}.md"
        path.write_text("\n".join(lines), encoding="utf-8")
        paths.append(path)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    paths.append(io.write_json(out / "timing.json", {"scenario": report.scenario,
                                                     "wall_time_s": round(report.wall_time, 3)}))
    return paths
