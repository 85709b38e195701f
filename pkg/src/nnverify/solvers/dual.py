"""Dual methods: Lagrangian Duality solved as an LP, and ConvDual's fixed dual point."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bounds import get_bounds
from ..lp import GE, LinearModel, solve_lp
from ..network import Activation, Layer, Network, Problem, Result, Status
from .base import Solver, halfspace_of, uniform_radius
from .symbolic import _slopes, fastlin_bounds


class _Objective:
    """Accumulates a linear objective over model variables plus a constant."""

    def __init__(self, model: LinearModel):
        self.model = model
        self.terms: dict[int, float] = {}
        self.const = 0.0

    def add(self, ids, coef) -> None:
        for v, c in zip(np.atleast_1d(ids), np.atleast_1d(coef)):
            if c != 0:
                self.terms[int(v)] = self.terms.get(int(v), 0.0) + float(c)

    def epigraph(self, pieces) -> int:
        """New t with t >= each piece; a piece is (ids, coefs, constant)."""
        t = self.model.add_var()
        for ids, coef, k in pieces:
            ids = np.concatenate([[t], np.asarray(ids, dtype=int)])
            coef = np.concatenate([[1.0], -np.asarray(coef, dtype=float)])
            self.model.add_constraint(ids, coef, GE, float(k))
        return t


def _abs_terms(obj: _Objective, base_ids, M, lam_ids, r) -> None:
    """Adds sum_k r_k |lam_k - (M^T mu)_k| where mu are base_ids; lam_ids may be None."""
    for k, rk in enumerate(r):
        if rk == 0:
            continue
        ids = list(base_ids)
        coef = list(-M[k, :])
        if lam_ids is not None:
            ids.append(lam_ids[k])
            coef.append(1.0)
        ids, coef = np.asarray(ids, dtype=int), np.asarray(coef)
        t = obj.epigraph([(ids, coef, 0.0), (ids, -coef, 0.0)])
        obj.add([t], [rk])


def duality_value(problem: Problem) -> float:
    """Optimal value of the relaxed dual, minus d; negative certifies the property."""
    c, d = halfspace_of(problem.output)
    net = problem.network
    bounds = get_bounds(net, problem.input)
    model = LinearModel()
    n = len(net.layers)
    mu = [model.add_vars(L.n_out) for L in net.layers]
    lam = [model.add_vars(L.n_out) for L in net.layers]
    for v, cv in zip(lam[-1], c):
        model.set_bounds(int(v), -cv, -cv)
    obj = _Objective(model)

    W0, b0 = net.layers[0].weights, net.layers[0].bias
    box0 = bounds.post[0]
    obj.add(mu[0], -(W0 @ box0.center + b0))
    _abs_terms(obj, mu[0], W0.T, None, box0.radius)
    for i in range(n - 1):
        box = bounds.post[i + 1]
        Wn, bn = net.layers[i + 1].weights, net.layers[i + 1].bias
        obj.add(lam[i], box.center)
        obj.add(mu[i + 1], -(Wn @ box.center + bn))
        _abs_terms(obj, mu[i + 1], Wn.T, lam[i], box.radius)
    for i, L in enumerate(net.layers):
        lo, hi = bounds.pre[i].low, bounds.pre[i].high
        slo, shi = L.act(lo), L.act(hi)
        for j in range(L.n_out):
            a = obj.epigraph([([mu[i][j]], [lo[j]], 0.0), ([mu[i][j]], [hi[j]], 0.0)])
            e = obj.epigraph([([lam[i][j]], [-slo[j]], 0.0), ([lam[i][j]], [-shi[j]], 0.0)])
            obj.add([a, e], [1.0, 1.0])
    ids = np.array(sorted(obj.terms), dtype=int)
    model.set_objective(ids, np.array([obj.terms[k] for k in ids]), "min", constant=obj.const)
    out = solve_lp(model)
    if not out.optimal:
        raise RuntimeError(f"dual LP ended with status {out.status.value}")
    return float(out.value - d)


@dataclass
class Duality(Solver):
    """Lagrangian relaxation over interval bounds."""

    name = "duality"
    input_kinds = ("hyperrectangle",)
    output_kinds = ("halfspace",)

    def solve(self, problem: Problem) -> Result:
        val = duality_value(problem)
        status = Status.HOLDS if val < 0 else Status.UNKNOWN
        return Result(status, info={"dual_value": val})


def _with_linear_tail(net: Network) -> Network:
    if not net.layers[-1].is_relu:
        return net
    k = net.n_outputs
    return Network(net.layers + (Layer(np.eye(k), np.zeros(k), Activation.ID),))


def convdual_value(problem: Problem) -> float:
    """Dual objective at the fixed feasible point; non-negative certifies the property."""
    c, d = halfspace_of(problem.output)
    eps = uniform_radius(problem.input)
    x0 = problem.input.center
    net = _with_linear_tail(problem.network)
    bounds = fastlin_bounds(net, x0, eps)
    v, o = c.astype(float).copy(), float(d)
    for i in range(len(net.layers) - 1, -1, -1):
        L = net.layers[i]
        o -= v @ L.bias
        v = L.weights.T @ v
        if i == 0:
            break
        prev = net.layers[i - 1]
        if not prev.is_relu:
            continue
        lo, hi = bounds.pre[i - 1].low, bounds.pre[i - 1].high
        slope, mixed = _slopes(lo, hi)
        v = slope * v
        o += float(lo[mixed] @ np.maximum(v[mixed], 0))
    o -= float(x0 @ v + eps * np.abs(v).sum())
    return o


@dataclass
class ConvDual(Solver):
    """Backward pass through the dual network at a fixed dual point."""

    name = "convdual"
    input_kinds = ("hyperrectangle",)
    output_kinds = ("halfspace",)

    def _check_extra(self, problem: Problem) -> None:
        uniform_radius(problem.input)

    def solve(self, problem: Problem) -> Result:
        val = convdual_value(problem)
        status = Status.HOLDS if val >= 0 else Status.UNKNOWN
        return Result(status, info={"dual_value": val})


def solve_duality(problem: Problem) -> Result:
    return Duality().solve(problem)


def solve_convdual(problem: Problem) -> Result:
    return ConvDual().solve(problem)
