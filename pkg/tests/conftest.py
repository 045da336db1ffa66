import os
import subprocess
import sys

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    """Collects one pass/fail line per acceptance criterion."""
    def record(number, ok, elapsed, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  ({elapsed:.1f} s)  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def run_python(code, **env):
    """Run ``code`` in a fresh interpreter with extra environment variables."""
    full = dict(os.environ, **env)
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=full,
                         timeout=600)
    if out.returncode != 0:
        raise RuntimeError(out.stderr)
    return out.stdout
