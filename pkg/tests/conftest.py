import numpy as np
import pytest


def random_state(C, rng, rank=None):
    rank = C if rank is None else rank
    X = rng.normal(size=(C, rank)) + 1j * rng.normal(size=(C, rank))
    rho = X @ X.conj().T
    return rho / np.trace(rho).real


def random_operator(C, rng):
    return rng.normal(size=(C, C)) + 1j * rng.normal(size=(C, C))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
