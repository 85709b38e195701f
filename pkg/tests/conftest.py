import numpy as np
import pytest

from nnverify.network import Activation, Layer, Network, Problem
from nnverify.sets import Halfspace, Hyperrectangle


def abs_net() -> Network:
    """y = relu(x) + relu(-x) = |x|."""
    return Network(
        (
            Layer([[1.0], [-1.0]], [0.0, 0.0], Activation.RELU),
            Layer([[1.0, 1.0]], [0.0], Activation.ID),
        )
    )


def id_net() -> Network:
    return Network((Layer([[1.0]], [0.0], Activation.ID),))


def unit_box() -> Hyperrectangle:
    return Hyperrectangle([0.0], [1.0])


@pytest.fixture
def net_abs():
    return abs_net()


@pytest.fixture
def net_id():
    return id_net()


@pytest.fixture
def box():
    return unit_box()


@pytest.fixture
def prob_hold():
    return Problem(abs_net(), unit_box(), Halfspace([1.0], 1.5))


@pytest.fixture
def prob_viol():
    return Problem(abs_net(), unit_box(), Halfspace([1.0], 0.5))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for n in sorted(REPORT):
            terminalreporter.write_line(REPORT[n])
