import math

import pytest

from ssh_ion_lab.couplings import PHI_TOPOLOGICAL, eta_for_dimerization

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, title, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] criterion {number}: {title}"
        if detail:
            line += f" ({detail})"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def eta_01():
    """Driving strength giving dimerization 0.1 at phi = 3 pi / 4."""
    return eta_for_dimerization(0.1, PHI_TOPOLOGICAL)


TWO_PI = 2 * math.pi
