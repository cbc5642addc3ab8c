import sys

import pytest

from microbeam.config import profile_defaults
from microbeam.scene import RadarParams


@pytest.fixture
def small_radar():
    """Short, coarse chirp grid that keeps synthesis cheap."""
    return RadarParams(bandwidth_hz=2.5e9, adc_rate_sps=64e3, samples_per_pri=64, num_pri=512,
                       noise_variance=0.0)


@pytest.fixture
def desk():
    return profile_defaults("desk")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if module and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(module.RESULTS):
            terminalreporter.write_line(line)
