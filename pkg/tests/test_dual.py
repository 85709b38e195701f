import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nnverify.bench import random_network
from nnverify.network import Activation, Layer, Network, Problem, Status
from nnverify.oracle import exact_range
from nnverify.sets import Halfspace, Hyperrectangle
from nnverify.solvers import ContractError, ConvDual, Duality
from nnverify.solvers.dual import convdual_value, duality_value


def test_duality_values(prob_hold, prob_viol, net_id, box):
    assert duality_value(prob_hold) == pytest.approx(0.5)
    assert duality_value(prob_viol) == pytest.approx(1.5)
    assert duality_value(Problem(net_id, box, Halfspace([1.0], 2.0))) == pytest.approx(-1.0)


def test_duality_statuses(prob_hold, net_id, box):
    res = Duality().solve(prob_hold)
    assert res.status is Status.UNKNOWN and res.info["dual_value"] == pytest.approx(0.5)
    assert Duality().solve(Problem(net_id, box, Halfspace([1.0], 2.0))).status is Status.HOLDS


def test_convdual_values(prob_hold, prob_viol):
    assert convdual_value(prob_hold) == pytest.approx(0.5)
    assert convdual_value(prob_viol) == pytest.approx(-0.5)
    assert ConvDual().solve(prob_hold).status is Status.HOLDS
    assert ConvDual().solve(prob_viol).status is Status.UNKNOWN


def test_convdual_relu_output_gets_linear_tail(box):
    net = Network((Layer([[1.0]], [0.0], Activation.RELU),))
    assert convdual_value(Problem(net, box, Halfspace([1.0], 2.0))) == pytest.approx(1.0)


def test_convdual_needs_uniform_radius(net_abs):
    p = Problem(
        Network((Layer([[1.0, 1.0]], [0.0], Activation.ID),)),
        Hyperrectangle([0.0, 0.0], [1.0, 0.5]),
        Halfspace([1.0], 5.0),
    )
    with pytest.raises(ContractError):
        ConvDual().check_contract(p)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dual_bounds_are_sound(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    box = Hyperrectangle(rng.uniform(-1, 1, net.n_inputs), np.full(net.n_inputs, rng.uniform(0.2, 1)))
    c = float(rng.choice([-1.0, 1.0]))
    lo, hi, _, _ = exact_range(net, box)
    true_max = hi if c > 0 else -lo
    d = float(rng.uniform(-2, 2))
    p = Problem(net, box, Halfspace([c], d))
    # both report an upper bound on c*y - d, with opposite sign conventions
    assert duality_value(p) >= true_max - d - 1e-7
    assert -convdual_value(p) >= true_max - d - 1e-7
