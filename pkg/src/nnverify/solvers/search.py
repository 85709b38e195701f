"""Search combined with optimization: Sherlock, BaB, Planet and Reluplex."""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

from ..bounds import LayerBounds, get_bounds, get_gradient
from ..encodings import SlackLP, StandardLP, TriangularRelaxedLP, encode_network, feasibility, min_sum
from ..lp import EQ, GE, LE, LPStatus, LinearModel, add_complement_constraint, add_set_constraint, solve_lp
from ..network import Network, Problem, Result, Status, get_activation, node_ids
from ..sat import Cnf, sat_solve
from ..sets import Halfspace, Hyperrectangle, split_interval, subset
from .base import ContractError, Solver, check_deadline, counter_example_result
from .primal import NSVerify

_RANGE_OUT = ("hyperrectangle",)
_CONVEX_COMPLEMENT = ("halfspace", "polytope_complement")


class _RangeSolver(Solver):
    input_kinds = ("hyperrectangle",)
    output_kinds = _RANGE_OUT

    def _check_extra(self, problem: Problem) -> None:
        if problem.network.n_outputs != 1:
            raise ContractError(f"{self.name} needs a network with a single output")

    @staticmethod
    def interpret(problem: Problem, reach: Hyperrectangle, bound: Hyperrectangle, x_l, x_u) -> Result:
        Y = problem.output
        if subset(reach, Y):
            return Result(Status.HOLDS, reachable=[reach])
        if bound.high[0] > Y.high[0]:
            res = counter_example_result(problem, x_u)
            if res.status is Status.VIOLATED:
                return res
        if bound.low[0] < Y.low[0]:
            res = counter_example_result(problem, x_l)
            if res.status is Status.VIOLATED:
                return res
        return Result(Status.UNKNOWN, reachable=[reach])


# ------------------------------------------------------------------ Sherlock


def local_search(problem: Problem, x: np.ndarray, sign: float):
    """Best point on the linear piece containing x, along the gradient at x."""
    net = problem.network
    model = LinearModel()
    enc = encode_network(model, net, StandardLP(get_activation(net, x)))
    add_set_constraint(model, problem.input, enc.z[0])
    g = get_gradient(net, x)[0]
    model.set_objective(enc.z[0], sign * g, "max")
    out = solve_lp(model)
    if not out.optimal:
        # the piece of x always contains x itself; fall back to it on numerical trouble
        return x, float(net.forward(x)[0])
    x_new = out.x[enc.z[0]]
    return x_new, float(net.forward(x_new)[0])


def global_search(problem: Problem, bound: float, sign: float):
    """A point with sign * f(x) >= sign * bound, or None."""
    target = Problem(problem.network, problem.input, Halfspace([sign], sign * bound))
    res = NSVerify().solve(target)
    if res.status is Status.VIOLATED:
        x = res.counter_example
        return x, float(problem.network.forward(x)[0])
    return None


@dataclass
class Sherlock(_RangeSolver):
    """Output range by alternating local LP ascent and global MILP jumps."""

    epsilon: float = 0.1

    name = "sherlock"

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    def output_bound(self, problem: Problem, sign: float):
        x = problem.input.center.copy()
        trace = []
        while True:
            check_deadline()
            x, bound = local_search(problem, x, sign)
            trace.append(bound)
            found = global_search(problem, bound + sign * self.epsilon, sign)
            if found is None:
                return x, bound, trace
            x, bound = found

    def solve(self, problem: Problem) -> Result:
        x_u, u, tu = self.output_bound(problem, 1.0)
        x_l, l, tl = self.output_bound(problem, -1.0)
        bound = Hyperrectangle.from_bounds([l], [u])
        reach = Hyperrectangle.from_bounds([l - self.epsilon], [u + self.epsilon])
        res = self.interpret(problem, reach, bound, x_l, x_u)
        res.info.update(bound=[l, u], local_max_trace=tu, local_min_trace=tl)
        return res


# ------------------------------------------------------------------ BaB


def concrete_bound(net: Network, dom: Hyperrectangle, sign: float):
    """Best of the output at the center, low and high corners."""
    points = [dom.center, dom.low, dom.high]
    vals = [float(net.forward(p).sum()) for p in points]
    k = int(np.argmax(sign * np.asarray(vals)))
    return vals[k], points[k]


def approx_bound(net: Network, dom: Hyperrectangle, sign: float) -> float:
    """Triangle-relaxation bound on the output over dom."""
    model = LinearModel()
    enc = encode_network(model, net, TriangularRelaxedLP(get_bounds(net, dom)))
    add_set_constraint(model, dom, enc.z[0])
    model.set_objective(enc.z[-1], np.full(enc.z[-1].size, sign), "max")
    out = solve_lp(model)
    if not out.optimal:
        raise RuntimeError(f"relaxed bound LP ended with status {out.status.value}")
    return sign * out.value


def split_longest(dom: Hyperrectangle):
    return split_interval(dom, int(np.argmax(dom.radius)))


@dataclass
class BaB(_RangeSolver):
    """Branch and bound on the input box with triangle-relaxation bounds."""

    epsilon: float = 0.1
    max_iter: int = 10_000

    name = "bab"

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    def output_bound(self, problem: Problem, sign: float):
        net = problem.network
        g_conc, x_star = concrete_bound(net, problem.input, sign)
        g_approx = approx_bound(net, problem.input, sign)
        # entries (-sign * approx, order, dom); the front has the most promising bound
        doms = [(-sign * g_approx, 0, problem.input)]
        counter = 1
        history = [g_approx]
        it = 0
        while sign * (g_approx - g_conc) > self.epsilon and doms and it < self.max_iter:
            it += 1
            check_deadline()
            _, _, dom = doms.pop(0)
            if not np.any(dom.radius > 0):
                continue
            for sub in split_longest(dom):
                c, x = concrete_bound(net, sub, sign)
                a = approx_bound(net, sub, sign)
                if sign * (c - g_conc) > 0:
                    g_conc, x_star = c, x
                if sign * (a - g_conc) > 0:
                    bisect.insort(doms, (-sign * a, counter, sub))
                    counter += 1
            g_approx = -sign * doms[0][0] if doms else g_conc
            history.append(g_approx)
        return g_approx + 0.0, g_conc, x_star, history

    def solve(self, problem: Problem) -> Result:
        u_approx, u, x_u, hu = self.output_bound(problem, 1.0)
        l_approx, l, x_l, hl = self.output_bound(problem, -1.0)
        bound = Hyperrectangle.from_bounds([l], [u])
        reach = Hyperrectangle.from_bounds([l_approx], [u_approx])
        res = self.interpret(problem, reach, bound, x_l, x_u)
        res.info.update(bound=[l, u], approx=[l_approx, u_approx], approx_history=[hl, hu])
        return res


# ------------------------------------------------------------------ Planet


def tighten_bounds(problem: Problem, bounds: LayerBounds) -> bool:
    """False when the triangle relaxation with y outside Y is infeasible."""
    for sense in ("min", "max"):
        model = LinearModel()
        enc = encode_network(model, problem.network, TriangularRelaxedLP(bounds))
        add_set_constraint(model, problem.input, enc.z[0])
        add_complement_constraint(model, problem.output, enc.z[-1])
        ids = np.concatenate(enc.z[1:])
        model.set_objective(ids, np.ones(ids.size), sense)
        if solve_lp(model).status is LPStatus.INFEASIBLE:
            return False
    return True


def init_psi(net: Network, bounds: LayerBounds) -> Cnf:
    """One clause per ReLU node: forced literal when its sign is fixed, tautology otherwise."""
    clauses = []
    for k, (i, j) in enumerate(node_ids(net), start=1):
        lo, hi = bounds.pre[i].low[j], bounds.pre[i].high[j]
        if lo > 0:
            clauses.append((k,))
        elif hi < 0:
            clauses.append((-k,))
        else:
            clauses.append((k, -k))
    return Cnf(len(node_ids(net)), tuple(clauses))


def pattern_from_assignment(net: Network, assignment) -> list[np.ndarray]:
    pattern = [np.ones(L.n_out, dtype=bool) for L in net.layers]
    for (i, j), v in zip(node_ids(net), assignment):
        pattern[i][j] = bool(v)
    return pattern


def elastic_filtering(problem: Problem, pattern, bounds: LayerBounds, tol: float = 1e-7):
    """('feasible', x) or ('infeasible', conflict clause)."""
    net = problem.network
    model = LinearModel()
    enc = encode_network(model, net, TriangularRelaxedLP(bounds))
    add_set_constraint(model, problem.input, enc.z[0])
    add_complement_constraint(model, problem.output, enc.z[-1])
    slp = encode_network(model, net, SlackLP(pattern), z=enc.z)
    ids = {node: k for k, node in enumerate(node_ids(net), start=1)}
    keys = sorted(slp.slack)
    min_sum(model, [[slp.slack[k] for k in keys]])
    conflict: list[int] = []
    fixed: set = set()
    while True:
        out = solve_lp(model)
        if not out.optimal:
            return "infeasible", conflict
        vals = np.array([out.x[slp.slack[k]] for k in keys])
        free = [n for n, k in enumerate(keys) if k not in fixed]
        if not free:
            return "feasible", out.x[enc.z[0]]
        best = max(free, key=lambda n: (vals[n], -n))
        if vals[best] <= tol:
            return "feasible", out.x[enc.z[0]]
        node = keys[best]
        conflict.append(-ids[node] if pattern[node[0]][node[1]] else ids[node])
        fixed.add(node)
        model.set_bounds(slp.slack[node], 0.0, 0.0)


@dataclass
class Planet(Solver):
    """SAT search over activation patterns with LP conflict analysis."""

    max_iter: int = 100_000

    name = "planet"
    input_kinds = ("hyperrectangle",)
    output_kinds = _CONVEX_COMPLEMENT
    complete = True

    def solve(self, problem: Problem) -> Result:
        net = problem.network
        bounds = get_bounds(net, problem.input)
        if not tighten_bounds(problem, bounds):
            return Result(Status.HOLDS, info={"conflicts": 0})
        psi = init_psi(net, bounds)
        for it in range(self.max_iter):
            check_deadline()
            assignment = sat_solve(psi)
            if assignment is None:
                return Result(Status.HOLDS, info={"conflicts": it})
            status, payload = elastic_filtering(problem, pattern_from_assignment(net, assignment), bounds)
            if status == "feasible":
                res = counter_example_result(problem, payload)
                res.info["conflicts"] = it
                return res
            if not payload:
                return Result(Status.HOLDS, info={"conflicts": it})
            psi = psi.with_clause(payload)
        return Result(Status.UNKNOWN, info={"conflicts": self.max_iter})


# ------------------------------------------------------------------ Reluplex


@dataclass
class _Basic:
    model: LinearModel
    z: list
    zh: list


def encode_basic(problem: Problem, bounds: LayerBounds) -> _Basic:
    """Paired variables zhat, z with z >= 0, z >= zhat on ReLU nodes and zhat inside its bounds."""
    net = problem.network
    model = LinearModel()
    z = [model.add_vars(net.n_inputs)]
    zh = []
    for i, L in enumerate(net.layers):
        h = np.array([model.add_var(lo, hi) for lo, hi in zip(bounds.pre[i].low, bounds.pre[i].high)])
        for j in range(L.n_out):
            w = L.weights[j]
            model.add_constraint(np.concatenate([[h[j]], z[-1]]), np.concatenate([[1.0], -w]), EQ, L.bias[j])
        if L.is_relu:
            v = model.add_vars(L.n_out, lower=0.0)
            for j in range(L.n_out):
                model.add_constraint([v[j], h[j]], [1.0, -1.0], GE, 0.0)
        else:
            v = model.add_vars(L.n_out)
            for j in range(L.n_out):
                model.add_constraint([v[j], h[j]], [1.0, -1.0], EQ, 0.0)
        zh.append(h)
        z.append(v)
    add_set_constraint(model, problem.input, z[0])
    add_complement_constraint(model, problem.output, z[-1])
    feasibility(model)
    return _Basic(model, z, zh)


@dataclass
class Reluplex(Solver):
    """Depth-first repair of broken ReLU constraints over an LP relaxation."""

    tol: float = 1e-6

    name = "reluplex"
    input_kinds = ("hyperrectangle",)
    output_kinds = _CONVEX_COMPLEMENT
    complete = True

    def _find_broken(self, net: Network, b: _Basic, x: np.ndarray):
        for i, j in node_ids(net):
            zh, z = x[b.zh[i][j]], x[b.z[i + 1][j]]
            if abs(z - max(zh, 0.0)) > self.tol:
                return i, j
        return None

    def _search(self, problem: Problem, bounds: LayerBounds, fixes: list, stats: dict) -> Result:
        check_deadline()
        stats["nodes"] += 1
        stats["depth"] = max(stats["depth"], len(fixes))
        b = encode_basic(problem, bounds)
        for i, j, active in fixes:
            h, v = b.zh[i][j], b.z[i + 1][j]
            if active:
                b.model.add_constraint([v, h], [1.0, -1.0], EQ, 0.0)
                b.model.add_constraint([h], [1.0], GE, 0.0)
            else:
                b.model.add_constraint([h], [1.0], LE, 0.0)
                b.model.add_constraint([v], [1.0], EQ, 0.0)
        out = solve_lp(b.model)
        if not out.optimal:
            return Result(Status.HOLDS)
        broken = self._find_broken(problem.network, b, out.x)
        if broken is None:
            return counter_example_result(problem, out.x[b.z[0]])
        results = []
        for active in (True, False):
            res = self._search(problem, bounds, fixes + [(*broken, active)], stats)
            if res.status is Status.VIOLATED:
                return res
            results.append(res)
        if all(r.status is Status.HOLDS for r in results):
            return Result(Status.HOLDS)
        return Result(Status.UNKNOWN)

    def solve(self, problem: Problem) -> Result:
        stats = {"nodes": 0, "depth": 0}
        res = self._search(problem, get_bounds(problem.network, problem.input), [], stats)
        res.info.update(stats)
        return res


def solve_sherlock(problem: Problem, **params) -> Result:
    return Sherlock(**params).solve(problem)


def solve_bab(problem: Problem, **params) -> Result:
    return BaB(**params).solve(problem)


def solve_planet(problem: Problem) -> Result:
    return Planet().solve(problem)


def solve_reluplex(problem: Problem) -> Result:
    return Reluplex().solve(problem)
