import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cyclone_eye.storm import build_storm_fis

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def storm_fis():
    return build_storm_fis()


@pytest.fixture(scope="session")
def default_fis():
    return build_storm_fis("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance_report():
    def record(number, label, ok, detail="", status=None):
        tag = status or ("PASS" if ok else "FAIL")
        line = f"[{tag}] criterion {number}: {label}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
