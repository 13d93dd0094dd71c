"""Shared fixtures and the acceptance summary hook.

Acceptance tests register one line per criterion through record_criterion;
the summary block is printed at the end of every run so the verdicts are
visible even when stdout capture is on.
"""

import numpy as np
import pytest

_CRITERIA = {}


def record_criterion(num: int, ok: bool, detail: str) -> bool:
    _CRITERIA[num] = (ok, detail)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        ok, detail = _CRITERIA[num]
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {verdict} - {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
