"""paracyc: exact verification suites and homology computations for equivariant periodic cyclic homology."""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _cap_threads() -> None:
    """PARACYC_THREADS caps the threads of the numerical backends (the engine itself is serial)."""
    cap = os.environ.get("PARACYC_THREADS")
    if cap is None:
        return
    if not cap.isdigit() or int(cap) < 1:
        print(f"paracyc: PARACYC_THREADS must be a positive integer, got {cap!r}", file=sys.stderr)
        sys.exit(2)
    for var in _THREAD_VARS:
        os.environ[var] = cap


_cap_threads()

from .algebras import BUILTIN_ALGEBRAS, GAlgebra, builtin_algebra, from_structure_constants  # noqa: E402
from .errors import InvalidInput, LevelTooHigh, ParacycError  # noqa: E402
from .groups import BUILTIN_GROUPS, FiniteGroup, MeasureConvention, group_from_name, validate_group  # noqa: E402
from .report import run_report, to_csv, to_json  # noqa: E402
from .suites import DEFAULT_LEVEL, JOBS  # noqa: E402

EXIT_PASS, EXIT_FAIL, EXIT_INVALID = 0, 1, 2
BUILTIN_GROUP_NAMES = tuple(BUILTIN_GROUPS) + ("cyclic(n)", "symmetric(n), n <= 4")


@dataclass
class JobSpec:
    command: str
    group: object  # builtin name or {"table": ..., "labels": ...}
    algebra: object  # builtin name or {"dim": ..., "constants": ..., "action": ..., "unit": ...}
    level: int
    measure: str = "counting"
    output: str | None = None
    format: str = "json"

    def echo(self) -> dict:
        return {"command": self.command, "group": self.group, "algebra": self.algebra, "level": self.level,
                "measure": self.measure, "format": self.format}


def build_group(desc) -> FiniteGroup:
    if isinstance(desc, str):
        return group_from_name(desc)
    if isinstance(desc, dict) and "table" in desc:
        return validate_group(desc["table"], desc.get("labels"), desc.get("name", "inline"))
    raise InvalidInput(f"group descriptor must be a builtin name or an inline table, got {desc!r}")


def build_algebra(desc, G: FiniteGroup, measure: MeasureConvention) -> GAlgebra:
    if isinstance(desc, str):
        return builtin_algebra(desc, G, measure)
    if isinstance(desc, dict) and "dim" in desc:
        try:
            dim = int(desc["dim"])
        except (TypeError, ValueError):
            raise InvalidInput("algebra dim must be an integer") from None
        if dim < 1:
            raise InvalidInput("algebra dim must be positive")
        return from_structure_constants(G, dim, desc.get("constants", []), desc.get("action"), desc.get("unit"),
                                        desc.get("name", "inline"))
    raise InvalidInput(f"algebra descriptor must be a builtin name or inline structure constants, got {desc!r}")


def _spec_from_args(args) -> JobSpec:
    doc: dict = {}
    if args.spec:
        try:
            with open(args.spec) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInput(f"cannot read spec {args.spec}: {exc}") from None
        if not isinstance(doc, dict):
            raise InvalidInput("spec must be a JSON object")
    command = args.command or doc.get("command")
    if command not in JOBS:
        raise InvalidInput(f"unknown or missing command {command!r}; choose from {', '.join(JOBS)}")
    group = args.group if args.group is not None else doc.get("group", "trivial")
    algebra = args.algebra if args.algebra is not None else doc.get("algebra", "scalars")
    level = args.level if args.level is not None else doc.get("level", DEFAULT_LEVEL[command])
    if isinstance(level, bool) or not isinstance(level, int):
        raise InvalidInput(f"level must be an integer, got {level!r}")
    if level < 2:
        raise InvalidInput("level must be at least 2")
    measure = args.measure or doc.get("measure", "counting")
    fmt = args.format or doc.get("format", "json")
    if fmt not in ("json", "csv"):
        raise InvalidInput(f"unknown format {fmt!r}")
    return JobSpec(command, group, algebra, level, measure, args.output or doc.get("output"), fmt)


def run_job(spec: JobSpec) -> tuple[dict, int]:
    """Run one job; returns the report and the exit status."""
    try:
        measure = MeasureConvention(spec.measure)
        G = build_group(spec.group)
        A = build_algebra(spec.algebra, G, measure)
    except (InvalidInput, LevelTooHigh) as exc:
        return _error_report(spec, exc), EXIT_INVALID
    try:
        suites = JOBS[spec.command](A, spec.level)
    except (InvalidInput, LevelTooHigh) as exc:
        return _error_report(spec, exc), EXIT_INVALID
    except ParacycError as exc:
        return _error_report(spec, exc, EXIT_FAIL), EXIT_FAIL
    status = EXIT_PASS if all(s.passed for s in suites) else EXIT_FAIL
    report = run_report(spec.command, spec.echo(), suites, status)
    report["inputs"] = {"group": G.name, "group_order": G.order, "algebra": A.name, "algebra_dim": A.dim,
                        "unital": A.unit is not None}
    return report, status


def _error_report(spec: JobSpec, exc: Exception, status: int = EXIT_INVALID) -> dict:
    report = run_report(spec.command, spec.echo(), [], status)
    report["error"] = {"type": type(exc).__name__, "detail": str(exc)}
    return report


def write_atomic(path: str, text: str) -> None:
    """Write through a temporary file in the target directory and rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".paracyc-", dir=directory)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def list_builtins() -> str:
    lines = ["commands:"] + [f"  {c}" for c in JOBS]
    lines += ["groups:"] + [f"  {g}" for g in BUILTIN_GROUP_NAMES]
    lines += ["algebras:"] + [f"  {a}" for a in BUILTIN_ALGEBRAS]
    lines += ["measures:", "  counting", "  normalized"]
    return "\n".join(lines)


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="paracyc", description=__doc__)
    p.add_argument("command", nargs="?", choices=list(JOBS), help="job to run (or give it in --spec)")
    p.add_argument("--spec", metavar="FILE", help="JSON job document")
    p.add_argument("--group", help="builtin group: trivial, klein4, cyclic(n), symmetric(n)")
    p.add_argument("--algebra", help="builtin algebra, e.g. scalars, unitarize(dual-numbers), crossed(O_G)")
    p.add_argument("--level", type=int, help="truncation level N")
    p.add_argument("--measure", choices=["counting", "normalized"], help="Haar measure convention")
    p.add_argument("--format", choices=["json", "csv"], help="report format (default json)")
    p.add_argument("--output", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--list-builtins", action="store_true", help="list commands, groups and algebras")
    return p


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    if args.list_builtins:
        print(list_builtins())
        return EXIT_PASS
    try:
        spec = _spec_from_args(args)
    except InvalidInput as exc:
        print(f"paracyc: {exc}", file=sys.stderr)
        return EXIT_INVALID
    report, status = run_job(spec)
    text = to_json(report) + "\n" if spec.format == "json" else to_csv(report)
    if spec.output:
        write_atomic(spec.output, text)
    else:
        sys.stdout.write(text)
    if "error" in report:
        print(f"paracyc: {report['error']['type']}: {report['error']['detail']}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
