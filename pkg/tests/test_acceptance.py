"""Acceptance criteria, one test each, at their stated tolerances.

Each test prints a single ``[PASS]``/``[FAIL]`` line, and the lines are
repeated in the terminal summary.
"""

import pytest

from substep.verification import CRITERIA, run_criterion

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", [n for n, _, _ in CRITERIA], ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number):
    result = run_criterion(number)
    line = result.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert result.passed, line
