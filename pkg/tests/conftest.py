import numpy as np
import pytest
from hypothesis import settings

from relaydde.maps import shape_conditions_double, shape_conditions_single
from relaydde.params import PRESETS, Params

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# lines collected by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def p1():
    return PRESETS["p1"]


@pytest.fixture
def p2():
    return PRESETS["p2"]


def random_single(rng, count):
    """Rejection-sample (params, h) with the single-period shape conditions met."""
    out = []
    while len(out) < count:
        P = Params(
            rng.uniform(0.5, 6.0), rng.uniform(0.05, 3.0), rng.uniform(2.0, 4.0),
            rng.uniform(0.5, 4.0), rng.uniform(0.05, 1.0),
        )
        h = rng.uniform(0.02, 3.0)
        if shape_conditions_single(P, h).satisfied:
            out.append((P, h))
    return out


def random_double(rng, count):
    out = []
    while len(out) < count:
        P = Params(
            rng.uniform(1.0, 6.0), rng.uniform(0.05, 3.0), rng.uniform(0.3, 1.5),
            rng.uniform(1.0, 5.0), rng.uniform(0.05, 1.0),
        )
        h = rng.uniform(0.02, 3.0)
        if shape_conditions_double(P, h).satisfied:
            out.append((P, h))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
