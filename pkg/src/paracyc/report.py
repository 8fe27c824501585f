"""Check records and run reports."""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

SCHEMA = 1
VERSION = "1.0.0"


@dataclass
class Check:
    name: str
    anchor: str
    passed: bool
    degree: int | None = None
    witness: dict | None = None
    detail: str = ""

    def as_dict(self) -> dict:
        d = asdict(self)
        d["status"] = "pass" if self.passed else "fail"
        del d["passed"]
        return d


@dataclass
class Suite:
    """An ordered list of checks with timing and free-form data tables."""

    title: str
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def add(self, name: str, anchor: str, passed: bool, degree=None, witness=None, detail="") -> Check:
        if not passed and witness is None:
            witness = {"detail": detail or "identity fails; no matrix witness recorded"}
        c = Check(name, anchor, bool(passed), degree, witness, detail)
        self.checks.append(c)
        return c

    def add_degreewise(self, name: str, anchor: str, results) -> None:
        """results: iterable of (degree, ok, witness) as produced by GOp.compare."""
        results = list(results)
        if not results:
            self.notes.append(f"{name}: no degree in the computable range")
        for deg, ok, wit in results:
            self.add(name, anchor, ok, deg, wit)

    def timed(self, key: str):
        suite = self

        class _T:
            def __enter__(self):
                self.t = time.perf_counter()

            def __exit__(self, *exc):
                suite.timings[key] = round(time.perf_counter() - self.t, 4)

        return _T()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> dict:
        names = []
        for c in self.checks:
            if c.name not in names:
                names.append(c.name)
        return {n: all(c.passed for c in self.checks if c.name == n) for n in names}

    def as_dict(self) -> dict:
        return {
            "title": self.title,
            "passed": self.passed,
            "n_checks": len(self.checks),
            "n_failed": len(self.failures()),
            "checks": [c.as_dict() for c in self.checks],
            "data": self.data,
            "notes": self.notes,
            "timings": self.timings,
        }


def run_report(command: str, job: dict, suites: list[Suite], exit_status: int) -> dict:
    return {
        "schema": SCHEMA,
        "tool": "paracyc",
        "version": VERSION,
        "command": command,
        "job": job,
        "suites": [s.as_dict() for s in suites],
        "exit_status": exit_status,
    }


def strip_timings(report: dict) -> dict:
    """Copy of a report without timing fields (for determinism comparisons)."""
    r = json.loads(json.dumps(report))
    for s in r.get("suites", []):
        s.pop("timings", None)
    r.pop("elapsed", None)
    return r


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def to_csv(report: dict) -> str:
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "check", "anchor", "degree", "status", "witness"])
    for s in report["suites"]:
        for c in s["checks"]:
            w.writerow([s["title"], c["name"], c["anchor"], "" if c["degree"] is None else c["degree"],
                        c["status"], "" if c["witness"] is None else json.dumps(c["witness"], sort_keys=True)])
        for key, rows in sorted(s.get("data", {}).items()):
            if isinstance(rows, list) and rows and isinstance(rows[0], dict):
                for row in rows:
                    w.writerow([s["title"], key, "", row.get("level", ""), "data", json.dumps(row, sort_keys=True)])
    return buf.getvalue()
