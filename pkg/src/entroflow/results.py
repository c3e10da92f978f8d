"""Result containers shared by the three test batteries."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ParseError, SchemaVersionError

__all__ = ["TestResult", "BatteryReport", "REPORT_SCHEMA_VERSION"]

REPORT_SCHEMA_VERSION = 1


def _plain(value):
    """Coerce numpy scalars/arrays into JSON-serialisable Python values."""
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


@dataclass
class TestResult:
    """Outcome of one statistical test on one subject.

    ``passed`` is None exactly when the test did not run.  ``flags`` carry
    caveats that do not change the verdict (fit failures, spec anomalies).
    """

    name: str
    statistic: float | None = None
    p_value: float | None = None
    passed: bool | None = None
    alpha: float | None = None
    not_run: bool = False
    reason: str = ""
    subject: str = ""
    flags: tuple = ()
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["flags"] = list(self.flags)
        return _plain(d)


@dataclass
class BatteryReport:
    """All results of one battery run plus battery-level aggregates."""

    battery: str
    results: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    schema_version: int = REPORT_SCHEMA_VERSION

    def add(self, result: TestResult) -> None:
        self.results.append(result)

    def by_test(self) -> dict:
        out: dict = {}
        for r in self.results:
            out.setdefault(r.name, []).append(r)
        return out

    def pass_rates(self) -> dict:
        """Per test: dict with n, n_run, n_pass, pass_rate over run instances."""
        rates = {}
        for name, results in self.by_test().items():
            run = [r for r in results if not r.not_run]
            n_pass = sum(1 for r in run if r.passed)
            rates[name] = {
                "n": len(results),
                "n_run": len(run),
                "n_pass": n_pass,
                "pass_rate": (n_pass / len(run)) if run else float("nan"),
            }
        return rates

    def miss_rates(self) -> dict:
        """Pass rate counting every not-run instance as a miss."""
        rates = {}
        for name, results in self.by_test().items():
            n_pass = sum(1 for r in results if not r.not_run and r.passed)
            rates[name] = (n_pass / len(results)) if results else float("nan")
        return rates

    def to_json(self, indent: int | None = 2) -> str:
        doc = {
            "schema_version": self.schema_version,
            "battery": self.battery,
            "summary": _plain(self.summary),
            "results": [r.to_dict() for r in self.results],
        }
        return json.dumps(doc, indent=indent, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "BatteryReport":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid report JSON: {exc}") from exc
        if not isinstance(doc, dict) or "battery" not in doc or "results" not in doc:
            raise ParseError("report JSON lacks required fields")
        version = doc.get("schema_version")
        if version != REPORT_SCHEMA_VERSION:
            raise SchemaVersionError(f"report schema {version} unsupported")
        rep = cls(battery=doc["battery"], summary=doc.get("summary", {}))
        for rd in doc["results"]:
            rep.add(
                TestResult(
                    name=rd["name"],
                    statistic=rd.get("statistic"),
                    p_value=rd.get("p_value"),
                    passed=rd.get("passed"),
                    alpha=rd.get("alpha"),
                    not_run=rd.get("not_run", False),
                    reason=rd.get("reason", ""),
                    subject=rd.get("subject", ""),
                    flags=tuple(rd.get("flags", ())),
                    details=rd.get("details", {}),
                )
            )
        return rep

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(
            ["battery", "subject", "test", "statistic", "p_value", "passed", "not_run", "flags"]
        )
        for r in self.results:
            writer.writerow(
                [
                    self.battery,
                    r.subject,
                    r.name,
                    "" if r.statistic is None else repr(float(r.statistic)),
                    "" if r.p_value is None else repr(float(r.p_value)),
                    "" if r.passed is None else int(r.passed),
                    int(r.not_run),
                    ";".join(r.flags),
                ]
            )
        return buf.getvalue()
