"""Primal optimization: NSVerify, MIPVerify and ILP."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bounds import get_bounds
from ..encodings import (
    BoundedMIP,
    LinearRelaxedLP,
    NaiveMIP,
    StandardLP,
    default_big_m,
    encode_network,
    feasibility,
    max_disturbance,
)
from ..lp import GE, LPStatus, LinearModel, add_complement_constraint, add_set_constraint, solve
from ..network import Network, Problem, Result, Status, get_activation
from ..sets import Hyperrectangle
from .base import Solver, counter_example_result

_CONVEX_COMPLEMENT = ("halfspace", "polytope_complement")


@dataclass
class NSVerify(Solver):
    """Big-M mixed-integer encoding searched for a feasible counter example."""

    m: float | None = None

    name = "nsverify"
    input_kinds = ("hyperrectangle", "hpolytope")
    output_kinds = _CONVEX_COMPLEMENT
    complete = True

    def solve(self, problem: Problem) -> Result:
        net = problem.network
        m = default_big_m(net, problem.input) if self.m is None else float(self.m)
        if m <= 0:
            raise ValueError("m must be positive")
        model = LinearModel()
        enc = encode_network(model, net, NaiveMIP(m))
        add_set_constraint(model, problem.input, enc.z[0])
        add_complement_constraint(model, problem.output, enc.z[-1])
        feasibility(model)
        out = solve(model)
        if out.status is LPStatus.INFEASIBLE:
            return Result(Status.HOLDS)
        if not out.optimal:
            return Result(Status.UNKNOWN, info={"lp_status": out.status.value})
        return counter_example_result(problem, out.x[enc.z[0]])


@dataclass
class MIPVerify(Solver):
    """Bounded mixed-integer encoding minimising the distance to a counter example."""

    name = "mipverify"
    input_kinds = ("hyperrectangle",)
    output_kinds = _CONVEX_COMPLEMENT
    complete = True

    def solve(self, problem: Problem) -> Result:
        net = problem.network
        model = LinearModel()
        enc = encode_network(model, net, BoundedMIP(get_bounds(net, problem.input)))
        add_complement_constraint(model, problem.output, enc.z[-1])
        max_disturbance(model, enc.z[0], problem.input.center)
        out = solve(model)
        rmax = float(np.max(problem.input.radius))
        if out.status is LPStatus.INFEASIBLE:
            return Result(Status.HOLDS)
        if not out.optimal:
            return Result(Status.UNKNOWN, info={"lp_status": out.status.value})
        if out.value >= rmax:
            return Result(Status.HOLDS, max_disturbance=out.value)
        return Result(Status.VIOLATED, max_disturbance=out.value, info={"witness": out.x[enc.z[0]].tolist()})


def _pattern_maps(net: Network, pattern):
    """Affine maps x -> zhat_i realised when every layer follows pattern."""
    A, c = np.eye(net.n_inputs), np.zeros(net.n_inputs)
    maps = []
    for L, p in zip(net.layers, pattern):
        Ah, ch = L.weights @ A, L.weights @ c + L.bias
        maps.append((Ah, ch))
        if L.is_relu:
            mask = np.asarray(p, dtype=float)
            A, c = mask[:, None] * Ah, mask * ch
        else:
            A, c = Ah, ch
    return maps


def box_in_pattern_region(net: Network, pattern, box: Hyperrectangle, tol: float = 1e-12) -> bool:
    """True when every point of box produces the given activation pattern (up to ties at zero)."""
    for L, p, (Ah, ch) in zip(net.layers, pattern, _pattern_maps(net, pattern)):
        if not L.is_relu:
            continue
        s = np.where(np.asarray(p, dtype=bool), 1.0, -1.0)
        M, k = s[:, None] * Ah, s * ch
        worst = M @ box.center - np.abs(M) @ box.radius + k
        if np.any(worst < -tol):
            return False
    return True


def _first_mismatch(net: Network, pattern, x: np.ndarray, zs, tol: float):
    """First (layer, node) whose pre-activation contradicts the pattern at the LP point."""
    for i, L in enumerate(net.layers):
        if not L.is_relu:
            continue
        zh = L.weights @ x[zs[i]] + L.bias
        s = np.where(np.asarray(pattern[i], dtype=bool), 1.0, -1.0)
        bad = np.flatnonzero(s * zh < -tol)
        if bad.size:
            return i, int(bad[0])
    return None


@dataclass
class ILP(Solver):
    """Single linear piece around the input center."""

    iterative: bool = False
    tol: float = 1e-7

    name = "ilp"
    input_kinds = ("hyperrectangle",)
    output_kinds = _CONVEX_COMPLEMENT

    def _interpret(self, problem: Problem, pattern, value, x) -> Result:
        rmax = float(np.max(problem.input.radius))
        if value is not None and value < rmax:
            return Result(Status.VIOLATED, max_disturbance=value, info={"witness": x.tolist()})
        if box_in_pattern_region(problem.network, pattern, problem.input):
            return Result(Status.HOLDS, max_disturbance=value)
        return Result(Status.UNKNOWN, max_disturbance=value)

    def solve(self, problem: Problem) -> Result:
        net = problem.network
        pattern = get_activation(net, problem.input.center)
        model = LinearModel()
        kind = LinearRelaxedLP(pattern) if self.iterative else StandardLP(pattern)
        enc = encode_network(model, net, kind)
        add_complement_constraint(model, problem.output, enc.z[-1])
        max_disturbance(model, enc.z[0], problem.input.center)
        limit = net.n_relu if self.iterative else 0
        added = 0
        while True:
            out = solve(model)
            if out.status is LPStatus.INFEASIBLE:
                return self._with_count(self._interpret(problem, pattern, None, None), added)
            if not out.optimal:
                return Result(Status.UNKNOWN, info={"lp_status": out.status.value})
            hit = _first_mismatch(net, pattern, out.x, enc.z, self.tol) if self.iterative else None
            if hit is not None and added >= limit:
                return self._with_count(Result(Status.UNKNOWN), added)
            if hit is None:
                x = out.x[enc.z[0]]
                return self._with_count(self._interpret(problem, pattern, out.value, x), added)
            i, j = hit
            L = net.layers[i]
            s = 1.0 if pattern[i][j] else -1.0
            model.add_constraint(enc.z[i], s * L.weights[j], GE, -s * L.bias[j])
            added += 1

    @staticmethod
    def _with_count(res: Result, added: int) -> Result:
        res.info["added_constraints"] = added
        return res


def solve_nsverify(problem: Problem, **params) -> Result:
    return NSVerify(**params).solve(problem)


def solve_mipverify(problem: Problem) -> Result:
    return MIPVerify().solve(problem)


def solve_ilp(problem: Problem, **params) -> Result:
    return ILP(**params).solve(problem)
