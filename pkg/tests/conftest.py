import functools
import time

import pytest

from hyamabe.certify import certify
from hyamabe.dimension import Dimensions

CASES = [(2, 2), (2, 3), (3, 2)]

_ACCEPTANCE_LINES = []


def record_criterion(label: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    _ACCEPTANCE_LINES.append(line)
    print(line)


# wall time of the first (uncached) run of each certification
CERTIFY_SECONDS = {}


@functools.lru_cache(maxsize=None)
def certification(n: int, m: int, mu: float = 0.99):
    """Certification traces are expensive; share them across test modules."""
    t0 = time.perf_counter()
    trace = certify(Dimensions(n, m), mu)
    CERTIFY_SECONDS[(n, m, mu)] = time.perf_counter() - t0
    return trace


@pytest.fixture(scope="session")
def traces():
    return {nm: certification(*nm) for nm in CASES}


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
