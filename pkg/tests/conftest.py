import sys
import time
from pathlib import Path

import numpy as np
import pytest

TESTS = Path(__file__).parent
DATA = TESTS / "data"

# let test modules import shared oracles with `from conftest import ...`
if str(TESTS) not in sys.path:
    sys.path.insert(0, str(TESTS))

_ACCEPTANCE = pytest.StashKey[list]()


def heis_f(u, x):
    """Step of the Heisenberg example system, written out by hand."""
    x1, x2, x3 = x
    return np.array([x1 + x2 + x2**2 / 2 + u * x2 + u * x3 - u / 2 - u**2 / 3, x2 + u, x2 + x3 - u / 2])


def heis_mat(g):
    x1, x2, x3 = g
    return np.array([[1.0, x2, x1], [0.0, 1.0, x3], [0.0, 0.0, 1.0]])


def heis_alg(X):
    a1, a2, a3 = X
    return np.array([[0.0, a2, a1], [0.0, 0.0, a3], [0.0, 0.0, 0.0]])


class AcceptanceRecorder:
    """Times one acceptance criterion and reports a single PASS/FAIL line."""

    def __init__(self, lines):
        self.lines = lines

    def __call__(self, number: int, title: str, bound_s: float):
        return _Criterion(self.lines, number, title, bound_s)


class _Criterion:
    def __init__(self, lines, number, title, bound_s):
        self.lines, self.number, self.title, self.bound = lines, number, title, bound_s
        self.details = []
        self.ok = True

    def check(self, ok: bool, detail: str):
        self.ok = self.ok and bool(ok)
        self.details.append(detail)

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        ok = self.ok and exc_type is None and elapsed < self.bound
        status = "PASS" if ok else "FAIL"
        detail = "; ".join(self.details) + (f"; error {exc_type.__name__}" if exc_type else "")
        line = f"[{status}] criterion {self.number} {self.title}: {detail} ({elapsed:.2f} s, bound {self.bound:g} s)"
        self.lines.append(line)
        print(line)
        self.elapsed = elapsed
        return False


@pytest.fixture
def criterion(request):
    return AcceptanceRecorder(request.config.stash.setdefault(_ACCEPTANCE, []))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance")
        for line in sorted(lines, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
