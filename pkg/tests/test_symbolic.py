import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nnverify.bench import random_box, random_network
from nnverify.bounds import get_bounds
from nnverify.network import Activation, Layer, Network, Problem, Status, validate_counter_example
from nnverify.oracle import exact_range, oracle_verify
from nnverify.sets import Halfspace, Hyperrectangle
from nnverify.solvers import DLV, FastLin, FastLip, ReluVal
from nnverify.solvers.symbolic import (
    chain_points,
    fastlin_bounds,
    fastlin_output_bound,
    relaxed_relu,
    sampling_intervals,
    smear_index,
    symbolic_forward,
)


class TestSymbolicIntervals:
    def test_abs_concrete_bounds(self, net_abs, box):
        conc = symbolic_forward(net_abs, box).sym.concrete()
        assert (conc.low[0], conc.high[0]) == pytest.approx((0.0, 2.0))

    def test_positive_half_keeps_equations(self, net_abs):
        m = symbolic_forward(net_abs, Hyperrectangle([0.5], [0.5]))
        # first node active (z = x), second inactive (z = 0)
        assert m.LA[0].tolist() == [1.0, 0.0] and m.UA[0].tolist() == [1.0, 0.0]
        # output row is x + 0 on both sides
        assert m.sym.Low[0] == pytest.approx([1.0, 0.0])
        assert m.sym.Up[0] == pytest.approx([1.0, 0.0])

    def test_smear_picks_sensitive_dimension(self):
        net = Network((Layer([[5.0, 0.1]], [0.0], Activation.RELU), Layer([[1.0]], [0.0], Activation.ID)))
        box = Hyperrectangle([0.0, 0.0], [1.0, 1.0])
        assert smear_index(net, symbolic_forward(net, box)) == 0

    def test_smear_tie_goes_low(self):
        net = Network((Layer([[1.0, 1.0]], [0.0], Activation.ID),))
        assert smear_index(net, symbolic_forward(net, Hyperrectangle([0.0, 0.0], [1.0, 1.0]))) == 0


class TestReluVal:
    def test_violation_found_at_three_quarters(self, prob_viol):
        res = ReluVal().solve(prob_viol)
        assert res.status is Status.VIOLATED
        assert res.counter_example == pytest.approx([0.75])

    def test_holds(self, prob_hold):
        assert ReluVal().solve(prob_hold).status is Status.HOLDS

    def test_bfs_agrees(self, prob_viol, prob_hold):
        assert ReluVal(tree_search="bfs").solve(prob_viol).status is Status.VIOLATED
        assert ReluVal(tree_search="bfs").solve(prob_hold).status is Status.HOLDS

    def test_exhaustion_is_unknown(self, net_abs, box):
        # violations exist only within 1e-3 of the edges; midpoints reach them after ~10 splits
        p = Problem(net_abs, box, Halfspace([1.0], 0.999))
        res = ReluVal(max_iter=3).solve(p)
        assert res.status is Status.UNKNOWN and res.info["iterations"] == 3
        assert ReluVal().solve(p).status is Status.VIOLATED

    def test_bad_strategy(self):
        with pytest.raises(ValueError):
            ReluVal(tree_search="best")


class TestFastLin:
    def test_relaxed_relu(self):
        assert relaxed_relu(-1.0, 1.0) == 0.5
        assert relaxed_relu(-1.0, -0.5) == 0.0
        assert relaxed_relu(0.5, 1.0) == 1.0

    def test_abs_output_bound(self, net_abs):
        b = fastlin_bounds(net_abs, [0.0], 1.0)
        assert (b.output.low[0], b.output.high[0]) == pytest.approx((0.0, 1.0))
        b = fastlin_bounds(net_abs, [0.0], 0.3)
        assert b.pre[0].high == pytest.approx([0.3, 0.3])

    def test_output_map(self, net_abs):
        assert fastlin_output_bound(net_abs, [0.0], 1.0, [-1.0]) == pytest.approx(0.0)

    def test_fixture_radii(self, prob_viol, net_abs):
        res = FastLin().solve(prob_viol)
        assert res.status is Status.VIOLATED
        assert res.max_disturbance == pytest.approx(0.5, abs=1e-3)
        p = Problem(net_abs, Hyperrectangle([0.0], [0.4]), Halfspace([1.0], 1.5))
        assert FastLin().solve(p).status is Status.HOLDS

    def test_fastlip(self, prob_viol, prob_hold, net_id):
        assert FastLip().solve(prob_viol).max_disturbance == pytest.approx(0.5, abs=1e-3)
        res = FastLip().solve(prob_hold)
        assert res.status is Status.HOLDS and res.max_disturbance == pytest.approx(1.5, abs=1e-3)
        p = Problem(net_id, Hyperrectangle([3.0], [1.0]), Halfspace([1.0], 2.0))
        res = FastLip().solve(p)
        assert res.status is Status.VIOLATED and res.max_disturbance == pytest.approx(-1.0)


class TestDLV:
    def test_sampling_intervals(self):
        L = Layer([[1.0, -2.0], [0.5, 0.0]], [0.0, 0.0], Activation.RELU)
        assert sampling_intervals(L, np.array([0.1, 0.1]), 0.5) == pytest.approx([0.1, 0.025])

    def test_chain_points_start_first_and_bounded(self):
        pts = list(chain_points(np.zeros(1), np.array([0.4]), Hyperrectangle([0.0], [1.0]), 100))
        assert pts[0] == pytest.approx([0.0])
        assert sorted(p[0] for p in pts) == pytest.approx([-0.8, -0.4, 0.0, 0.4, 0.8])
        assert len(list(chain_points(np.zeros(1), np.array([0.01]), Hyperrectangle([0.0], [1.0]), 7))) == 7

    def test_counter_example(self, prob_viol):
        res = DLV().solve(prob_viol)
        assert res.status is Status.VIOLATED
        assert validate_counter_example(prob_viol, res.counter_example)

    def test_holds_only_by_bounds(self, net_abs, box):
        p = Problem(net_abs, box, Hyperrectangle([1.0], [1.5]))
        assert DLV().solve(p).status is Status.HOLDS

    def test_gamma_range(self):
        with pytest.raises(ValueError):
            DLV(gamma=1.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_symbolic_within_interval_bounds(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    box = random_box(rng, net.n_inputs)
    sym = symbolic_forward(net, box).sym.concrete()
    ib = get_bounds(net, box).output
    assert np.all(sym.low >= ib.low - 1e-9) and np.all(sym.high <= ib.high + 1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.1, 0.5, 1.0]))
def test_fastlin_contains_true_range(seed, eps):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    x0 = rng.uniform(-1, 1, net.n_inputs)
    lo, hi, _, _ = exact_range(net, Hyperrectangle(x0, np.full(net.n_inputs, eps)))
    out = fastlin_bounds(net, x0, eps).output
    assert out.low[0] <= lo + 1e-9 and out.high[0] >= hi - 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reluval_sound_and_complete(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    box = random_box(rng, net.n_inputs)
    lo, hi, _, _ = exact_range(net, box)
    d = float(rng.uniform(lo - 0.2, hi + 0.2))
    p = Problem(net, box, Halfspace([1.0], d))
    res = ReluVal().solve(p)
    truth = oracle_verify(p).status
    if res.status is Status.VIOLATED:
        assert validate_counter_example(p, res.counter_example)
    if res.status is not Status.UNKNOWN:
        assert res.status is truth


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fastlip_radius_is_sound(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    box = random_box(rng, net.n_inputs)
    c = float(rng.choice([-1.0, 1.0]))
    y0 = c * net.forward(box.center)[0]
    p = Problem(net, box, Halfspace([c], y0 + float(rng.uniform(0.05, 1.0))))
    res = FastLip().solve(p)
    r = res.max_disturbance
    if r is None or r <= 0:
        return
    # no violation inside the certified ball
    ball = Hyperrectangle(box.center, np.full(net.n_inputs, min(r, 50.0)))
    assert oracle_verify(Problem(net, ball, p.output)).status is Status.HOLDS


def test_dlv_never_holds_without_bound_inclusion():
    rng = np.random.default_rng(3)
    for _ in range(10):
        net = random_network(rng)
        box = random_box(rng, net.n_inputs)
        lo, hi, _, _ = exact_range(net, box)
        p = Problem(net, box, Halfspace([1.0], (lo + hi) / 2 + 0.5 * (hi - lo) * float(rng.random())))
        res = DLV().solve(p)
        if res.status is Status.HOLDS:
            assert get_bounds(net, box).output.high[0] <= p.output.d + 1e-9
