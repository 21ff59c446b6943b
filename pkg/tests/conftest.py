"""Shared fixtures plus the acceptance-criteria summary hook.

Acceptance tests record one line per numbered criterion through the
``criterion`` fixture; the terminal summary prints them after the run so a
single glance shows which contract points hold.
"""

import numpy as np
import pytest

from privexp import JointPmf

_LINES: dict[int, tuple[bool, str]] = {}


def _record(num: int, passed: bool, detail: str) -> None:
    _LINES[num] = (bool(passed), detail)


@pytest.fixture
def criterion():
    """Callable (number, passed, detail) feeding the summary section."""
    return _record


@pytest.fixture
def dsbs01() -> JointPmf:
    # doubly symmetric binary source, crossover 0.1
    return JointPmf(np.array([[0.45, 0.05], [0.05, 0.45]]), ("X", "Y"))


@pytest.fixture
def product_uniform() -> JointPmf:
    return JointPmf(np.full((2, 2), 0.25), ("X", "Y"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_LINES):
        passed, detail = _LINES[num]
        word = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {word} - {detail}")
