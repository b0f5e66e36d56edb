import contextlib
import io
import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def run_cli(monkeypatch):
    """Run the command line in-process; returns (exit code, stdout text)."""
    from gelfond.cli import run

    def _run(*argv, threads_env=None):
        if threads_env is None:
            monkeypatch.delenv("GELFOND_THREADS", raising=False)
        else:
            monkeypatch.setenv("GELFOND_THREADS", str(threads_env))
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
            code = run([str(a) for a in argv])
        return code, buf.getvalue()

    return _run


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Print and record one PASS/FAIL line for an acceptance criterion."""

    def _verdict(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok

    return _verdict


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
