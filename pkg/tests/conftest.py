import numpy as np
import pytest

from arht import LeastSquaresObjective

ACCEPTANCE_LINES: list = []


def record(criterion: str, passed: bool, detail: str = "") -> None:
    """Print one summary line for an acceptance criterion and keep it for the terminal summary."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}" + (f": {detail}" if detail else "")
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_ls(m: int, n: int, seed: int) -> LeastSquaresObjective:
    r = np.random.default_rng(seed)
    return LeastSquaresObjective(r.standard_normal((m, n)), r.standard_normal(m))
