import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ils_lab import IntegrationConfig, ModelParams
from _report import ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def desk_params():
    return ModelParams(0.2, 0.2, 4.5, 30, 10, 0.05)


@pytest.fixture
def tiny_params():
    return ModelParams(0.2, 0.2, 4.5, 3, 1, 0.0)


@pytest.fixture
def cfg():
    return IntegrationConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(42)
