import re

import pytest

from rosa.codegen.build import BuildError, compiler

ACCEPTANCE_LINES: list = []


def has_cc() -> bool:
    try:
        compiler()
        return True
    except BuildError:
        return False


needs_cc = pytest.mark.skipif(not has_cc(), reason="no C compiler")


def renumber(text: str) -> str:
    """Statement ids depend on parse order; map them to 1, 2, ... by first appearance."""
    ids: dict = {}
    return re.sub(r"\bs(\d+)\b", lambda m: "s%d" % ids.setdefault(m.group(1), len(ids) + 1), text)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def tmp_cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


__all__ = ["ACCEPTANCE_LINES", "needs_cc", "renumber"]
