import numpy as np
import pytest

from nnverify.network import (
    Activation,
    Layer,
    Network,
    Problem,
    Result,
    Status,
    forward,
    get_activation,
    node_ids,
    relu,
    validate_counter_example,
)
from nnverify.sets import Halfspace, Hyperrectangle


def test_relu_is_elementwise_max():
    assert np.array_equal(relu(np.array([-1.0, 0.0, 2.0])), [0.0, 0.0, 2.0])


def test_forward_abs(net_abs):
    for x in (-0.7, 0.0, 0.25, 1.0):
        assert forward(net_abs, [x]) == pytest.approx([abs(x)])


def test_trace_lengths(net_abs):
    post, pre = net_abs.trace([0.5])
    assert len(post) == 3 and len(pre) == 2
    assert pre[0] == pytest.approx([0.5, -0.5])
    assert post[1] == pytest.approx([0.5, 0.0])


def test_widths_and_relu_count(net_abs, net_id):
    assert net_abs.widths == [1, 2, 1]
    assert net_abs.n_relu == 2
    assert net_id.n_relu == 0
    assert node_ids(net_abs) == [(0, 0), (0, 1)]


def test_activation_pattern(net_abs):
    pat = get_activation(net_abs, [0.3])
    assert pat[0].tolist() == [True, False]


def test_layer_shape_checks():
    with pytest.raises(ValueError):
        Layer([[1.0, 2.0]], [0.0, 0.0])
    with pytest.raises(ValueError):
        Layer([[np.inf]], [0.0])
    with pytest.raises(ValueError):
        Network((Layer([[1.0]], [0.0]), Layer([[1.0, 1.0]], [0.0])))


def test_layers_are_immutable(net_abs):
    with pytest.raises(ValueError):
        net_abs.layers[0].weights[0, 0] = 5.0


def test_problem_dimension_checks(net_abs):
    with pytest.raises(ValueError):
        Problem(net_abs, Hyperrectangle([0.0, 0.0], [1.0, 1.0]), Halfspace([1.0], 1.0))
    with pytest.raises(ValueError):
        Problem(net_abs, Hyperrectangle([0.0], [1.0]), Halfspace([1.0, 1.0], 1.0))


def test_result_kind_and_payload():
    r = Result(Status.VIOLATED, counter_example=[0.5])
    assert r.kind == "counter_example"
    assert r.payload() == {"counter_example": [0.5]}
    assert Result("holds").kind == "basic"
    assert Result(Status.VIOLATED, max_disturbance=0.25).kind == "adversarial"
    assert Result(Status.HOLDS, reachable=[Hyperrectangle([0.0], [1.0])]).kind == "reachability"


def test_validate_counter_example(prob_viol, prob_hold):
    assert validate_counter_example(prob_viol, [0.75])
    assert validate_counter_example(prob_viol, [-0.5])  # boundary of Y counts
    assert not validate_counter_example(prob_viol, [0.2])
    assert not validate_counter_example(prob_viol, [1.5])  # outside X
    assert not validate_counter_example(prob_hold, [1.0])


def test_activation_enum_roundtrip():
    assert Activation("relu") is Activation.RELU
    assert Layer([[1.0]], [0.0], "id").activation is Activation.ID
