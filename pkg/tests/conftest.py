import numpy as np
import pytest

from catsim import DriveTrace, SchemeConfig, calibrate_defaults


def flat_trace(n, sinr, speed=10.0, drive_id="flat", route_length=None):
    """Constant-SINR, constant-speed trace on the 1 s grid t = 0..n-1."""
    t = np.arange(n, dtype=float)
    d = t * speed
    return DriveTrace(
        t=t,
        distance=d,
        sinr=np.full(n, float(sinr)),
        route_length=route_length or max(d[-1], 1.0),
        drive_id=drive_id,
    )


@pytest.fixture
def cfg():
    return SchemeConfig()


@pytest.fixture
def channel():
    return calibrate_defaults()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
