"""Reachability combined with search: ReluVal, FastLin, FastLip and DLV."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bounds import (
    ACTIVE,
    LayerBounds,
    get_bounds,
    get_gradient_bounds,
    gradient_bounds_from_masks,
    interval_map,
    node_status,
)
from ..encodings import BoundedMIP, encode_network, max_disturbance
from ..lp import add_set_constraint, solve
from ..network import Activation, Layer, Network, Problem, Result, Status
from ..sets import Hyperrectangle, split_interval, subset
from .base import Solver, check_deadline, counter_example_result, halfspace_of

_SEARCH_OUT = ("hyperrectangle", "halfspace", "hpolytope", "polytope_complement")


# ------------------------------------------------------------------ symbolic intervals


@dataclass
class SymbolicInterval:
    """Rows are affine forms over [x, 1]; Low @ [x,1] <= z <= Up @ [x,1] on the interval."""

    Low: np.ndarray
    Up: np.ndarray
    interval: Hyperrectangle

    def _conc(self, M, sign):
        A, b = M[:, :-1], M[:, -1]
        return A @ self.interval.center + sign * (np.abs(A) @ self.interval.radius) + b

    def lower(self) -> np.ndarray:
        return self._conc(self.Low, -1.0)

    def upper(self) -> np.ndarray:
        return self._conc(self.Up, 1.0)

    def concrete(self) -> Hyperrectangle:
        return Hyperrectangle.from_bounds(self.lower(), self.upper())


@dataclass
class SymbolicIntervalMask:
    sym: SymbolicInterval
    LA: list
    UA: list


def _row_bound(row, box: Hyperrectangle, sign: float) -> float:
    return float(row[:-1] @ box.center + sign * np.abs(row[:-1]) @ box.radius + row[-1])


def symbolic_forward(net: Network, box: Hyperrectangle) -> SymbolicIntervalMask:
    n0 = net.n_inputs
    Low = Up = np.hstack([np.eye(n0), np.zeros((n0, 1))])
    LA, UA = [], []
    for L in net.layers:
        Wp, Wn = np.maximum(L.weights, 0), np.minimum(L.weights, 0)
        Low, Up = Wp @ Low + Wn @ Up, Wp @ Up + Wn @ Low
        Low[:, -1] += L.bias
        Up[:, -1] += L.bias
        la, ua = np.ones(L.n_out), np.ones(L.n_out)
        if L.is_relu:
            for j in range(L.n_out):
                if _row_bound(Up[j], box, 1.0) <= 0:
                    Low[j] = Up[j] = 0.0
                    la[j] = ua[j] = 0.0
                elif _row_bound(Low[j], box, -1.0) >= 0:
                    pass
                else:
                    la[j] = 0.0
                    Low[j] = 0.0
                    if _row_bound(Up[j], box, -1.0) < 0:
                        top = _row_bound(Up[j], box, 1.0)
                        Up[j] = 0.0
                        Up[j, -1] = top
        LA.append(la)
        UA.append(ua)
    return SymbolicIntervalMask(SymbolicInterval(Low, Up, box), LA, UA)


def smear_index(net: Network, mask: SymbolicIntervalMask) -> int:
    """Input dimension with the largest gradient-weighted width; ties go to the lowest index."""
    g = gradient_bounds_from_masks(net, mask.LA, mask.UA)
    r = mask.sym.interval.radius
    S = r * np.maximum(np.abs(g.UG), np.abs(g.LG)).sum(axis=0)
    if np.all(S <= 0):
        return int(np.argmax(r))
    return int(np.argmax(S))


@dataclass
class ReluVal(Solver):
    """Symbolic interval propagation with iterative input bisection."""

    max_iter: int = 1000
    tree_search: str = "dfs"

    name = "reluval"
    input_kinds = ("hyperrectangle",)
    output_kinds = _SEARCH_OUT
    complete = True

    def __post_init__(self):
        if self.tree_search not in ("dfs", "bfs"):
            raise ValueError("tree_search must be 'dfs' or 'bfs'")

    def reachable(self, problem: Problem) -> list[Hyperrectangle]:
        return [symbolic_forward(problem.network, problem.input).sym.concrete()]

    def _check(self, problem: Problem, mask: SymbolicIntervalMask) -> Result:
        if subset(mask.sym.concrete(), problem.output):
            return Result(Status.HOLDS)
        mid = mask.sym.interval.center
        if not problem.output.member(problem.network.forward(mid), tol=0.0):
            res = counter_example_result(problem, mid)
            if res.status is Status.VIOLATED:
                return res
        return Result(Status.UNKNOWN)

    def solve(self, problem: Problem) -> Result:
        net = problem.network
        first = symbolic_forward(net, problem.input)
        res = self._check(problem, first)
        if res.status is not Status.UNKNOWN:
            return res
        work = [first]
        for it in range(self.max_iter):
            if not work:
                return Result(Status.HOLDS, info={"iterations": it})
            check_deadline()
            cur = work.pop() if self.tree_search == "dfs" else work.pop(0)
            box = cur.sym.interval
            if not np.any(box.radius > 0):
                return Result(Status.UNKNOWN, info={"iterations": it})
            k = smear_index(net, cur)
            if box.radius[k] <= 0:
                k = int(np.argmax(box.radius))
            for half in split_interval(box, k):
                m = symbolic_forward(net, half)
                res = self._check(problem, m)
                if res.status is Status.VIOLATED:
                    res.info["iterations"] = it + 1
                    return res
                if res.status is Status.UNKNOWN:
                    work.append(m)
        if not work:
            return Result(Status.HOLDS, info={"iterations": self.max_iter})
        return Result(Status.UNKNOWN, info={"iterations": self.max_iter})


# ------------------------------------------------------------------ FastLin


def relaxed_relu(l: float, u: float) -> float:
    if u <= 0:
        return 0.0
    if l >= 0:
        return 1.0
    return u / (u - l)


def _slopes(lo, hi):
    st = node_status(lo, hi)
    d = np.where(st == ACTIVE, 1.0, 0.0)
    mixed = st == 0
    d[mixed] = hi[mixed] / (hi[mixed] - lo[mixed])
    return d, mixed


def fastlin_bounds(net: Network, x0, eps: float) -> LayerBounds:
    """Pre-activation bounds from the linear relaxation, reusing the dual matrices V of the previous layer."""
    x0 = np.asarray(x0, dtype=float)
    box = Hyperrectangle(x0, np.full(x0.size, float(eps)))
    Ws = [L.weights for L in net.layers]
    bs = [L.bias for L in net.layers]
    lows, highs, D, G = [], [], [], []
    V: list[np.ndarray] = []
    for t in range(len(net.layers)):
        # Vt[i] holds the coefficients of zhat_t on zhat_i under the relaxation
        if t > 0:
            step = D[t - 1][:, None] * Ws[t].T
            V = [Vi @ step for Vi in V] + [step]
        Vt = V + [np.eye(Ws[t].shape[0])]
        A = Ws[0].T @ Vt[0]
        psi = A.T @ x0 + sum(Vi.T @ b for Vi, b in zip(Vt, bs[: t + 1]))
        spread = eps * np.abs(A).sum(axis=0)
        pos = np.zeros(Ws[t].shape[0])
        neg = np.zeros(Ws[t].shape[0])
        for i in range(t):
            l = np.where(G[i], lows[i], 0.0)
            pos += np.maximum(Vt[i], 0).T @ l
            neg += np.minimum(Vt[i], 0).T @ l
        lo, hi = psi - spread - neg, psi + spread - pos
        lows.append(lo)
        highs.append(hi)
        if net.layers[t].is_relu:
            d, g = _slopes(lo, hi)
        else:
            d, g = np.ones(lo.size), np.zeros(lo.size, dtype=bool)
        D.append(d)
        G.append(g)
    pre = tuple(Hyperrectangle.from_bounds(l, h) for l, h in zip(lows, highs))
    post = (box,) + tuple(
        Hyperrectangle.from_bounds(L.act(l), L.act(h)) for L, l, h in zip(net.layers, lows, highs)
    )
    return LayerBounds(post, pre)


def with_output_map(net: Network, c) -> Network:
    """net followed by an identity layer computing c @ y."""
    c = np.atleast_2d(np.asarray(c, dtype=float))
    return Network(net.layers + (Layer(c, np.zeros(c.shape[0]), Activation.ID),))


def fastlin_output_bound(net: Network, x0, eps: float, c) -> float:
    """FastLin upper bound on c @ f(x) over the eps-ball around x0."""
    return float(fastlin_bounds(with_output_map(net, c), x0, eps).pre[-1].high[0])


@dataclass
class FastLin(Solver):
    """Binary search on the certified input radius."""

    max_iter: int = 20
    epsilon0: float | None = None
    accuracy: float = 1e-4

    name = "fastlin"
    input_kinds = ("hyperrectangle",)
    output_kinds = ("halfspace", "hpolytope", "hyperrectangle", "polytope_complement")

    def certified_radius(self, problem: Problem) -> float:
        box = problem.input
        rmax = float(np.max(box.radius))
        eps0 = rmax if self.epsilon0 is None else float(self.epsilon0)
        upper = 2 * max(eps0, rmax)
        lower = 0.0
        eps = rmax
        for _ in range(self.max_iter):
            out = fastlin_bounds(problem.network, box.center, eps).output
            if subset(out, problem.output):
                lower = eps
                nxt = (eps + upper) / 2
                if abs(eps - nxt) <= self.accuracy:
                    break
            else:
                upper = eps
                nxt = (eps + lower) / 2
            eps = nxt
        return lower

    def solve(self, problem: Problem) -> Result:
        lower = self.certified_radius(problem)
        status = Status.HOLDS if lower > np.max(problem.input.radius) else Status.VIOLATED
        return Result(status, max_disturbance=lower)


@dataclass
class FastLip(Solver):
    """FastLin radius refined by a local Lipschitz bound."""

    max_iter: int = 20
    epsilon0: float | None = None
    accuracy: float = 1e-4

    name = "fastlip"
    input_kinds = ("hyperrectangle",)
    output_kinds = ("halfspace",)

    def solve(self, problem: Problem) -> Result:
        c, d = halfspace_of(problem.output)
        o = float(c @ problem.network.forward(problem.input.center) - d)
        if o > 0:
            return Result(Status.VIOLATED, max_disturbance=-o)
        res = FastLin(self.max_iter, self.epsilon0, self.accuracy).solve(problem)
        if res.status is Status.VIOLATED:
            return res
        g = get_gradient_bounds(problem.network, problem.input)
        a, b = interval_map(c[None, :], g.LG, g.UG)
        v = float(np.maximum(np.abs(a), np.abs(b)).sum())
        lip = -o / v if v > 0 else np.inf
        eps = min(lip, res.max_disturbance)
        status = Status.HOLDS if eps > np.max(problem.input.radius) else Status.VIOLATED
        return Result(status, max_disturbance=float(eps))


# ------------------------------------------------------------------ DLV


def sampling_intervals(layer: Layer, prev: np.ndarray, gamma: float) -> np.ndarray:
    """Per-node sample spacing: gamma times the largest projected spacing of the previous layer."""
    proj = np.abs(layer.weights) * prev[None, :]
    return gamma * np.max(layer.act(proj), axis=1)


def chain_points(start: np.ndarray, step: np.ndarray, box: Hyperrectangle, max_points: int):
    """start, then start +- m * step_j e_j inside box, walking each axis outward."""
    yield start
    max_points -= 1
    for j in range(start.size):
        if step[j] <= 0:
            continue
        for sign in (1.0, -1.0):
            m = 1
            while True:
                p = start.copy()
                p[j] += sign * m * step[j]
                if not box.member(p, tol=1e-12):
                    break
                yield p
                max_points -= 1
                if max_points <= 0:
                    return
                m += 1


def backward_map(net: Network, problem: Problem, z: np.ndarray, bounds: LayerBounds):
    """Input in X closest to the center whose image under net is z, or None."""
    from ..lp import LinearModel

    model = LinearModel()
    enc = encode_network(model, net, BoundedMIP(bounds))
    add_set_constraint(model, problem.input, enc.z[0])
    for v, val in zip(enc.z[-1], z):
        model.add_constraint([v], [1.0], "==", float(val))
    max_disturbance(model, enc.z[0], problem.input.center)
    out = solve(model)
    if not out.optimal:
        return None
    return out.x[enc.z[0]]


@dataclass
class DLV(Solver):
    """Layer-by-layer sampling of hidden values, mapped back to the input by a MILP."""

    epsilon: float | None = None
    gamma: float = 0.5
    max_backward: int = 20
    max_points: int = 1000

    name = "dlv"
    input_kinds = ("hyperrectangle",)
    output_kinds = _SEARCH_OUT

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")

    def solve(self, problem: Problem) -> Result:
        net = problem.network
        eta = get_bounds(net, problem.input)
        if subset(eta.output, problem.output):
            return Result(Status.HOLDS)
        eps = 0.1 * float(np.max(problem.input.radius)) if self.epsilon is None else float(self.epsilon)
        delta = np.full(net.n_inputs, eps)
        post, _ = net.trace(problem.input.center)
        tried = 0
        for i, L in enumerate(net.layers):
            delta = sampling_intervals(L, delta, self.gamma)
            tail = Network(net.layers[i + 1 :]) if i + 1 < len(net.layers) else None
            head = Network(net.layers[: i + 1])
            head_bounds = LayerBounds(eta.post[: i + 2], eta.pre[: i + 1])
            backward = 0
            for z in chain_points(post[i + 1], delta, eta.post[i + 1], self.max_points):
                y = z if tail is None else tail.forward(z)
                if problem.output.member(y, tol=0.0):
                    continue
                if backward >= self.max_backward:
                    break
                backward += 1
                tried += 1
                check_deadline()
                x = backward_map(head, problem, z, head_bounds)
                if x is None:
                    continue
                res = counter_example_result(problem, x, layer=i)
                if res.status is Status.VIOLATED:
                    return res
        return Result(Status.VIOLATED, reachable=[eta.output], info={"backward_maps": tried})


def solve_reluval(problem: Problem, **params) -> Result:
    return ReluVal(**params).solve(problem)


def solve_fastlin(problem: Problem, **params) -> Result:
    return FastLin(**params).solve(problem)


def solve_fastlip(problem: Problem, **params) -> Result:
    return FastLip(**params).solve(problem)


def solve_dlv(problem: Problem, **params) -> Result:
    return DLV(**params).solve(problem)
