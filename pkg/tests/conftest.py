import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from darkthermo import DriveConfig, ZeemanField, build_ca40_system, build_lambda_system  # noqa: E402

# wide-scan parameter set with four visible dark resonances
FIG5 = dict(detuning_397_mhz=-14.0, rabi_397_mhz=12.0, rabi_866_mhz=8.0, b_field_t=4.7e-4)
LINEWIDTHS = (0.45, 0.49)


@pytest.fixture(scope="session")
def ca40():
    return build_ca40_system()


@pytest.fixture(scope="session")
def lam3():
    return build_lambda_system(1.0 / (2 * math.pi * 7e-3), 0.9)


@pytest.fixture
def fig5_drives():
    a = DriveConfig(FIG5["detuning_397_mhz"], FIG5["rabi_397_mhz"], 397.0, LINEWIDTHS[0])
    b = DriveConfig(0.0, FIG5["rabi_866_mhz"], 866.0, LINEWIDTHS[1])
    return a, b, ZeemanField(FIG5["b_field_t"])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from _acceptance_log import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
