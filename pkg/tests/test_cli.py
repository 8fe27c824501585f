import json
import os
import subprocess
import sys

import pytest

from paracyc import cli, suites
from paracyc.cli import JobSpec, main, run_job, write_atomic
from paracyc.report import Suite, strip_timings


def _run(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_pass_exit_and_schema(capsys):
    code, out, _ = _run(capsys, ["stability", "--group", "cyclic(2)", "--algebra", "scalars"])
    assert code == 0
    r = json.loads(out)
    assert r["exit_status"] == 0 and r["schema"] == 1 and r["command"] == "stability"
    assert r["inputs"]["group_order"] == 2
    assert all(c["status"] == "pass" for s in r["suites"] for c in s["checks"])


@pytest.mark.parametrize("argv", [["hpg", "--group", "nonsense"], ["hpg", "--algebra", "nonsense"],
                                  ["hpg", "--level", "1"], []])
def test_invalid_input_exit(capsys, argv):
    code, _, err = _run(capsys, argv)
    assert code == 2 and err


def test_failing_suite_exit(monkeypatch, capsys):
    def broken(A, N):
        s = Suite("broken")
        s.add("1 = 2", "1 = 2", False)
        return [s]

    monkeypatch.setitem(cli.JOBS, "stability", broken)
    code, out, _ = _run(capsys, ["stability"])
    assert code == 1 and json.loads(out)["exit_status"] == 1


def test_csv_and_atomic_output(tmp_path, capsys):
    path = tmp_path / "r.csv"
    assert main(["verify-forms", "--level", "3", "--format", "csv", "--output", str(path)]) == 0
    text = path.read_text()
    assert text.startswith("suite,check,anchor,degree,status,witness")
    assert [p.name for p in tmp_path.iterdir()] == ["r.csv"]


def test_write_atomic_replaces(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("old")
    write_atomic(str(p), "new")
    assert p.read_text() == "new" and len(list(tmp_path.iterdir())) == 1


def test_spec_file_with_inline_inputs(tmp_path, capsys):
    spec = {"command": "verify-forms", "level": 3,
            "group": {"table": [[0, 1], [1, 0]], "labels": ["e", "s"]},
            "algebra": {"dim": 2, "constants": [[0, 0, 0, 1, 1], [0, 1, 1, 1, 1], [1, 0, 1, 1, 1]],
                        "action": {"1": [[0, 0, 1, 1], [1, 1, -1, 1]]}, "unit": [[0, 1, 1]]}}
    f = tmp_path / "job.json"
    f.write_text(json.dumps(spec))
    code, out, err = _run(capsys, ["--spec", str(f)])
    assert code == 0, err
    assert json.loads(out)["inputs"]["algebra_dim"] == 2


def test_malformed_inline_algebra(tmp_path, capsys):
    f = tmp_path / "job.json"
    f.write_text(json.dumps({"command": "verify-forms", "algebra": {"dim": 1, "constants": [[0, 0, 0, 1]]}}))
    code, out, _ = _run(capsys, ["--spec", str(f)])
    assert code == 2 and json.loads(out)["error"]["type"] == "InvalidInput"


@pytest.mark.parametrize("command", list(suites.JOBS))
def test_determinism(command):
    spec = JobSpec(command, "cyclic(2)", "scalars", 3 if command in ("verify-forms", "hpg", "hp") else
                   suites.DEFAULT_LEVEL[command])
    a, sa = run_job(spec)
    b, sb = run_job(spec)
    assert sa == sb
    assert strip_timings(a) == strip_timings(b)


def test_list_builtins(capsys):
    code, out, _ = _run(capsys, ["--list-builtins"])
    assert code == 0 and "verify-cq" in out and "klein4" in out


def test_invalid_thread_cap():
    env = dict(os.environ, PARACYC_THREADS="zero")
    p = subprocess.run([sys.executable, "-m", "paracyc.cli", "--list-builtins"], env=env, capture_output=True,
                       text=True)
    assert p.returncode == 2 and "PARACYC_THREADS" in p.stderr
    env["PARACYC_THREADS"] = "2"
    assert subprocess.run([sys.executable, "-m", "paracyc.cli", "--list-builtins"], env=env,
                          capture_output=True).returncode == 0
