import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture(autouse=True)
def _default_memory_budget(monkeypatch):
    monkeypatch.delenv("RES_SCOPE_MEM_MB", raising=False)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acceptance.VERDICTS):
        terminalreporter.write_line(acceptance.VERDICTS[n])
