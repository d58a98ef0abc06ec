import numpy as np
import pytest

from substep.tableau import build_tableau

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def tableaus():
    """Every scheme at a few dissipation levels, keyed by (s, rho_inf)."""
    out = {(1, 1.0): build_tableau(1)}
    for s in range(2, 7):
        for rho in (0.0, 0.5, 1.0):
            out[(s, rho)] = build_tableau(s, rho)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
