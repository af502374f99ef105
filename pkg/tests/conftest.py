import pytest

from flqkd.eve import MonitorRates
from flqkd.params import preset

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def params():
    return preset("zhuang2016")


def synthetic_rates(f_E, S_A=1.0e6, S_B=2.0e5, contrast_A=3.0e3, accidental=50.0, S_I=5.0e5):
    """Toy monitor rates whose normalized coincidence contrast at Bob scales with 1 - f_E."""
    C_IA = accidental + contrast_A
    contrast_B = (1.0 - f_E) * contrast_A * S_B / S_A
    return MonitorRates(
        S_I=S_I, S_A=S_A, S_B=S_B, C_IA=C_IA, C_IB=accidental + contrast_B,
        Ct_IA=accidental, Ct_IB=accidental,
    )


@pytest.fixture
def accept():
    """Record one acceptance line; printed in the terminal summary."""

    def record(number, passed, detail):
        ACCEPTANCE_LINES.append((number, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda x: x[0]):
        terminalreporter.write_line(f"[{number:>2}] {'PASS' if passed else 'FAIL'}  {detail}")
