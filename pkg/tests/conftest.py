import math

import numpy as np
import pytest

from gaplab.dynamics import rotation
from gaplab.sampling import constant, cosine

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance(request, capsys):
    """Record and echo one PASS/FAIL line for an acceptance criterion."""
    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {number}: {detail}"
        request.config._acceptance_lines.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        return ok
    return record


@pytest.fixture(scope="session")
def amo():
    """Almost Mathieu operator at coupling 3 over the golden rotation."""
    return rotation(GOLDEN), constant(1.0), cosine(6.0)


@pytest.fixture(scope="session")
def free_model():
    return rotation(GOLDEN), constant(1.0), constant(0.0)


def dense(diag, off):
    off = np.asarray(off)
    H = np.diag(np.asarray(diag, dtype=off.dtype if np.iscomplexobj(off) else float))
    if len(diag) > 1:
        H = H + np.diag(off, 1) + np.diag(np.conj(off), -1)
    return H
