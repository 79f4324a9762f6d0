import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from scienet import synthetic
from scienet.network import SnnModel

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def shapes():
    return synthetic.make_dataset(40, seed=11)


@pytest.fixture
def small_model():
    return SnnModel.initialize(8, 3072, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
