import math

import numpy as np
import pytest

from photonbell.model import ExperimentConfig


def random_config(rng, beta_le_alpha=False):
    alpha = rng.uniform(0.1, 3.0)
    beta = rng.uniform(0.05, alpha) if beta_le_alpha else rng.uniform(0.0, 3.0)
    return ExperimentConfig(
        alpha=alpha,
        beta=beta,
        C=rng.uniform(0.05, 1.0),
        theta_i=rng.uniform(0, 2 * math.pi),
        theta_j=rng.uniform(0, 2 * math.pi),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def default_cfg():
    return ExperimentConfig()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
