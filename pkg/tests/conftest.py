import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from paracyc.algebras import builtin_algebra  # noqa: E402
from paracyc.groups import group_from_name  # noqa: E402

GROUPS = ["trivial", "cyclic(2)", "cyclic(3)", "klein4", "symmetric(3)"]
ALGEBRAS = ["scalars", "dual-numbers", "group-algebra-adjoint", "O_G", "functions-on-G-set"]
CORPUS = [(g, a) for g in GROUPS for a in ALGEBRAS]


def algebra(group: str, name: str):
    return builtin_algebra(name, group_from_name(group))


@pytest.fixture(params=CORPUS, ids=[f"{g}-{a}" for g, a in CORPUS])
def corpus_algebra(request):
    return algebra(*request.param)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
