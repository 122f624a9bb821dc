import numpy as np
import pytest

from tenseig import _core


def random_unit(rng, n):
    x = rng.standard_normal(n)
    return x / np.linalg.norm(x)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(params=sorted(_core.BACKENDS))
def backend(request):
    return request.param


ACCEPTANCE_LINES = {}


def report(criterion, ok, detail):
    """Record (and print) one acceptance line; the terminal summary lists them all."""
    line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
