"""Exhaustive activation-pattern oracle used as ground truth in tests and benchmarks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .encodings import StandardLP, encode_network, feasibility
from .lp import LinearModel, add_complement_constraint, add_set_constraint, solve_lp
from .network import Network, Problem, Status
from .sets import Halfspace, Hyperrectangle, PolytopeComplement, VPolytope, v_to_h

MAX_NODES = 16


class OracleBudgetError(ValueError):
    pass


@dataclass
class OracleResult:
    status: Status
    witness: np.ndarray | None = None
    patterns: int = 0


def _piece_model(net: Network, input_set, pattern):
    model = LinearModel()
    enc = encode_network(model, net, StandardLP(pattern))
    add_set_constraint(model, input_set, enc.z[0])
    return model, enc


def feasible_patterns(net: Network, input_set, max_nodes: int = MAX_NODES) -> list[list[np.ndarray]]:
    """Every activation pattern realised by some input in input_set, pruning infeasible prefixes."""
    if net.n_relu > max_nodes:
        raise OracleBudgetError(f"{net.n_relu} ReLU nodes exceed the oracle budget of {max_nodes}")
    found = []

    def visit(prefix):
        i = len(prefix)
        if i == len(net.layers):
            found.append(prefix)
            return
        L = net.layers[i]
        if not L.is_relu:
            visit(prefix + [np.ones(L.n_out, dtype=bool)])
            return
        for bits in itertools.product((True, False), repeat=L.n_out):
            cand = prefix + [np.array(bits, dtype=bool)]
            model, _ = _piece_model(Network(net.layers[: i + 1]), input_set, cand)
            feasibility(model)
            if solve_lp(model).optimal:
                visit(cand)

    visit([])
    return found


def _output_rows(Y):
    if isinstance(Y, VPolytope):
        Y = v_to_h(Y)
    return Y.constraints()


def oracle_verify(problem: Problem, max_nodes: int = MAX_NODES, tol: float = 1e-9) -> OracleResult:
    """Decides the problem exactly: violated with a witness, or holds.

    Outputs on the boundary of a closed Y count as inside; a polytope complement
    is open, so its boundary counts as outside.
    """
    net, Y = problem.network, problem.output
    patterns = feasible_patterns(net, problem.input, max_nodes)
    for p in patterns:
        if isinstance(Y, PolytopeComplement):
            model, enc = _piece_model(net, problem.input, p)
            add_complement_constraint(model, Y, enc.z[-1])
            feasibility(model)
            out = solve_lp(model)
            if out.optimal:
                return OracleResult(Status.VIOLATED, out.x[enc.z[0]], len(patterns))
            continue
        C, d = _output_rows(Y)
        for row, rhs in zip(C, d):
            model, enc = _piece_model(net, problem.input, p)
            model.set_objective(enc.z[-1], row, "max")
            out = solve_lp(model)
            if out.optimal and out.value > rhs + tol:
                return OracleResult(Status.VIOLATED, out.x[enc.z[0]], len(patterns))
    return OracleResult(Status.HOLDS, None, len(patterns))


def exact_range(net: Network, input_set, max_nodes: int = MAX_NODES):
    """(low, high, x_low, x_high) of a single-output network over input_set."""
    if net.n_outputs != 1:
        raise ValueError("exact_range needs a single-output network")
    lo, hi, x_lo, x_hi = np.inf, -np.inf, None, None
    for p in feasible_patterns(net, input_set, max_nodes):
        for sense in ("min", "max"):
            model, enc = _piece_model(net, input_set, p)
            model.set_objective(enc.z[-1], [1.0], sense)
            out = solve_lp(model)
            if not out.optimal:
                continue
            if sense == "min" and out.value < lo:
                lo, x_lo = out.value, out.x[enc.z[0]]
            if sense == "max" and out.value > hi:
                hi, x_hi = out.value, out.x[enc.z[0]]
    return float(lo), float(hi), x_lo, x_hi


def grid_points(box: Hyperrectangle, count: int) -> np.ndarray:
    """Regular grid over box with at least count points (corners included)."""
    n = box.dim
    per_axis = max(2, int(np.ceil(count ** (1.0 / n))))
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in zip(box.low, box.high)]
    return np.array(list(itertools.product(*axes)))


__all__ = ["MAX_NODES", "OracleBudgetError", "OracleResult", "exact_range", "feasible_patterns", "grid_points", "oracle_verify"]
