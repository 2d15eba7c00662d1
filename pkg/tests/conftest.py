import numpy as np
import pytest

from dropletfsk.calibration import CalibrationCurve, default_curve


@pytest.fixture(scope="session")
def curve():
    return default_curve()


@pytest.fixture
def flat_curve():
    """Two-knot curve spanning the operating range with near-constant rate."""

    def make(freq, lo=200.0, hi=260.0):
        return CalibrationCurve.from_arrays([lo, hi], [freq, freq * (1 + 1e-12)])

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
