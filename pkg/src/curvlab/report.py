"""Scenario reports: versioned JSON and one-row-per-check CSV."""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, CurvlabError

SCHEMA = "curvlab-report/1"
CSV_HEADER = ["name", "status", "max_violation", "tolerance", "samples", "witness"]
STATUSES = ("pass", "fail", "error", "skipped")


class ReportIOError(CurvlabError):
    pass


def jsonable(obj):
    """Plain-JSON copy: numpy scalars/arrays to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if obj is None or isinstance(obj, str):
        return obj
    return repr(obj)


@dataclass
class CheckResult:
    name: str
    status: str
    max_violation: float | None
    tolerance: float | None
    samples: int
    witness: list | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status!r}")

    def to_dict(self):
        return jsonable({
            "name": self.name, "status": self.status, "max_violation": self.max_violation,
            "tolerance": self.tolerance, "samples": self.samples, "witness": self.witness,
            "info": self.info,
        })

    @classmethod
    def from_dict(cls, d):
        return cls(d["name"], d["status"], d.get("max_violation"), d.get("tolerance"),
                   int(d.get("samples", 0)), d.get("witness"), dict(d.get("info", {})))


@dataclass
class ScenarioReport:
    scenario: dict
    checks: list
    metadata: dict
    schema: str = SCHEMA
    corollary1: dict | None = None

    def to_dict(self):
        d = {
            "schema": self.schema, "scenario": self.scenario,
            "checks": [c.to_dict() for c in self.checks], "metadata": self.metadata,
        }
        if self.corollary1 is not None:
            d["corollary1"] = self.corollary1
        return jsonable(d)

    @classmethod
    def from_dict(cls, d):
        if d.get("schema") != SCHEMA:
            raise ConfigurationError(f"unsupported report schema {d.get('schema')!r}")
        return cls(d.get("scenario", {}), [CheckResult.from_dict(c) for c in d.get("checks", [])],
                   d.get("metadata", {}), d["schema"], d.get("corollary1"))

    @property
    def exit_code(self):
        statuses = {c.status for c in self.checks}
        if "error" in statuses:
            return 2
        if "fail" in statuses:
            return 1
        return 0

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for c in self.checks:
            witness = "" if c.witness is None else " ".join(repr(float(v)) for v in c.witness)
            writer.writerow([c.name, c.status, _fmt(c.max_violation), _fmt(c.tolerance), c.samples, witness])
        return buf.getvalue()


def _fmt(x):
    return "" if x is None else repr(float(x))


def parse_report(text):
    return ScenarioReport.from_dict(json.loads(text))


def emit_report(report, path=None, fmt="json"):
    """Serialize; write to ``path`` when given.  Returns the text."""
    if fmt == "json":
        text = report.to_json()
    elif fmt == "csv":
        text = report.to_csv()
    else:
        raise ConfigurationError(f"unknown report format {fmt!r}")
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise ReportIOError(f"cannot write report to {path}: {exc.strerror}") from exc
    return text


def read_report(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ReportIOError(f"cannot read report {path}: {exc.strerror}") from exc
    return parse_report(text)
