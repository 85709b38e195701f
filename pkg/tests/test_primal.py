import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nnverify.bench import random_instance
from nnverify.network import Problem, Status, get_activation, validate_counter_example
from nnverify.oracle import oracle_verify
from nnverify.sets import Halfspace, HPolytope, Hyperrectangle, PolytopeComplement
from nnverify.solvers import ILP, MIPVerify, NSVerify
from nnverify.solvers.primal import box_in_pattern_region


class TestNSVerify:
    def test_fixtures(self, prob_viol, prob_hold):
        res = NSVerify().solve(prob_viol)
        assert res.status is Status.VIOLATED
        assert abs(res.counter_example[0]) >= 0.5 - 1e-9
        assert validate_counter_example(prob_viol, res.counter_example)
        assert NSVerify().solve(prob_hold).status is Status.HOLDS

    def test_explicit_big_m(self, prob_viol):
        assert NSVerify(m=10.0).solve(prob_viol).status is Status.VIOLATED
        with pytest.raises(ValueError):
            NSVerify(m=-1.0).solve(prob_viol)

    def test_polytope_input(self, net_abs):
        X = HPolytope([[1.0], [-1.0]], [0.4, 0.4])
        assert NSVerify().solve(Problem(net_abs, X, Halfspace([1.0], 0.5))).status is Status.HOLDS


class TestMIPVerify:
    def test_fixtures(self, prob_viol, prob_hold):
        res = MIPVerify().solve(prob_viol)
        assert res.status is Status.VIOLATED and res.max_disturbance == pytest.approx(0.5)
        assert res.kind == "adversarial"
        assert MIPVerify().solve(prob_hold).status is Status.HOLDS

    def test_zero_radius(self, net_abs):
        p = Problem(net_abs, Hyperrectangle([0.2], [0.0]), Halfspace([1.0], 0.5))
        assert MIPVerify().solve(p).status is Status.HOLDS

    def test_complement_output(self, net_abs, box):
        Y = PolytopeComplement(HPolytope([[1.0], [-1.0]], [2.0, -0.8]))
        res = MIPVerify().solve(Problem(net_abs, box, Y))
        assert res.status is Status.VIOLATED and res.max_disturbance == pytest.approx(0.8)


class TestILP:
    def test_pattern_region(self, net_abs):
        pat = get_activation(net_abs, [0.5])
        assert box_in_pattern_region(net_abs, pat, Hyperrectangle([0.5], [0.5]))
        assert not box_in_pattern_region(net_abs, pat, Hyperrectangle([0.5], [0.6]))

    def test_center_piece_only(self, prob_viol):
        # the center sits on the kink, so the piece does not cover the box
        assert ILP().solve(prob_viol).status is Status.UNKNOWN

    def test_violation_inside_piece(self, net_abs):
        p = Problem(net_abs, Hyperrectangle([0.75], [0.25]), Halfspace([1.0], 0.5))
        res = ILP().solve(p)
        assert res.status is Status.VIOLATED and res.max_disturbance == pytest.approx(0.0)

    def test_holds_inside_piece(self, net_abs):
        p = Problem(net_abs, Hyperrectangle([0.5], [0.25]), Halfspace([1.0], 1.0))
        assert ILP().solve(p).status is Status.HOLDS

    def test_iterative_counts_constraints(self, net_abs):
        p = Problem(net_abs, Hyperrectangle([0.5], [0.25]), Halfspace([1.0], 1.0))
        res = ILP(iterative=True).solve(p)
        assert res.status is Status.HOLDS and "added_constraints" in res.info


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["hs", "pc"]))
def test_complete_mip_solvers_match_oracle(seed, form):
    inst = random_instance(np.random.default_rng(seed), form)
    truth = oracle_verify(inst.problem).status
    res = NSVerify().solve(inst.problem)
    assert res.status is truth
    if res.status is Status.VIOLATED:
        assert validate_counter_example(inst.problem, res.counter_example)
    assert MIPVerify().solve(inst.problem).status is truth


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_ilp_never_unsound(seed, iterative):
    inst = random_instance(np.random.default_rng(seed), "hs")
    res = ILP(iterative=iterative).solve(inst.problem)
    if res.status is Status.HOLDS:
        assert oracle_verify(inst.problem).status is Status.HOLDS
