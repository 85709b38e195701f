"""Layer-by-layer reachability: ExactReach, Ai2 and MaxSens."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..network import Problem, Result, Status
from ..sets import (
    HPolytope,
    Hyperrectangle,
    VPolytope,
    _dedupe,
    convex_hull,
    enumerate_vertices,
    hull_vertices,
    is_empty,
    subset,
    to_box,
)
from .base import Solver, check_deadline

_REACH_OUT = ("hyperrectangle", "hpolytope", "vpolytope", "halfspace", "polytope_complement")


class ScaleLimitError(ValueError):
    pass


def check_inclusion(reach: list, output) -> Result:
    if all(subset(r, output) for r in reach):
        return Result(Status.HOLDS, reachable=reach)
    return Result(Status.VIOLATED, reachable=reach)


def _input_hrep(s):
    if isinstance(s, (Hyperrectangle, HPolytope)):
        return s.constraints()
    raise TypeError("input set must be a hyperrectangle or an hpolytope")


def _sign_split(vals: np.ndarray):
    """Forced activity per node from its values at the vertices of a piece."""
    vmin, vmax = vals.min(axis=0), vals.max(axis=0)
    inactive = vmax <= 0
    active = (vmin >= 0) & ~inactive
    mixed = np.flatnonzero(~active & ~inactive)
    return active, mixed


def _patterns(active: np.ndarray, mixed: np.ndarray):
    for bits in itertools.product((False, True), repeat=mixed.size):
        p = active.copy()
        p[mixed] = bits
        yield p, np.asarray(bits, dtype=bool)


@dataclass
class ExactReach(Solver):
    """Exact union of polytopes, one per feasible activation pattern.

    Each piece is carried as an input-space region together with the affine map
    that the network realises on it, so the reachable piece is the image of the
    region's vertices.
    """

    max_width: int = 10

    name = "exactreach"
    input_kinds = ("hyperrectangle", "hpolytope")
    output_kinds = _REACH_OUT
    complete = True

    def reachable(self, problem: Problem) -> list[VPolytope]:
        net = problem.network
        C, d = _input_hrep(problem.input)
        V = enumerate_vertices(C, d)
        if V.shape[0] == 0:
            return []
        n0 = net.n_inputs
        pieces = [(C, d, V, np.eye(n0), np.zeros(n0))]
        for i, L in enumerate(net.layers):
            if L.is_relu and L.n_out > self.max_width:
                raise ScaleLimitError(f"layer {i} has width {L.n_out} > {self.max_width}")
            nxt = []
            for C, d, V, A, c in pieces:
                check_deadline()
                Ah, ch = L.weights @ A, L.weights @ c + L.bias
                if not L.is_relu:
                    nxt.append((C, d, V, Ah, ch))
                    continue
                active, mixed = _sign_split(V @ Ah.T + ch)
                for p, bits in _patterns(active, mixed):
                    # (I - 2P) zhat <= 0 on the undecided nodes
                    s = np.where(bits, -1.0, 1.0)
                    C2 = np.vstack([C, s[:, None] * Ah[mixed]])
                    d2 = np.concatenate([d, -s * ch[mixed]])
                    if mixed.size and is_empty(HPolytope(C2, d2)):
                        continue
                    V2 = enumerate_vertices(C2, d2) if mixed.size else V
                    if V2.shape[0] == 0:
                        continue
                    C2, d2 = _tight_rows(C2, d2, V2)
                    mask = p.astype(float)
                    nxt.append((C2, d2, V2, mask[:, None] * Ah, mask * ch))
            pieces = nxt
        return [VPolytope(_dedupe(V @ A.T + c)) for _, _, V, A, c in pieces]

    def solve(self, problem: Problem) -> Result:
        return check_inclusion(self.reachable(problem), problem.output)


def _tight_rows(C, d, V, tol=1e-9):
    """Drop rows that no vertex makes tight; they are redundant for a bounded piece."""
    slack = d[None, :] - V @ C.T
    keep = np.any(slack <= tol * (1 + np.abs(d)), axis=0)
    return C[keep], d[keep]


def _clip(P: np.ndarray, a: np.ndarray, rhs: float, tol: float = 1e-12) -> np.ndarray:
    """Vertices of conv(P) intersected with {a x <= rhs}."""
    vals = P @ a - rhs
    inside = vals <= tol
    if inside.all():
        return P
    if not inside.any():
        return P[:0]
    lo = np.flatnonzero(vals < -tol)
    hi = np.flatnonzero(~inside)
    t = vals[lo][:, None] / (vals[lo][:, None] - vals[hi][None, :])
    cross = P[lo][:, None, :] + t[..., None] * (P[hi][None, :, :] - P[lo][:, None, :])
    pts = np.vstack([P[inside], cross.reshape(-1, P.shape[1])])
    return hull_vertices(pts)


@dataclass
class Ai2(Solver):
    """Polytope abstract interpretation: partition by activation pattern, then join by convex hull."""

    max_width: int = 10

    name = "ai2"
    input_kinds = ("hyperrectangle", "hpolytope")
    output_kinds = _REACH_OUT

    def reachable(self, problem: Problem) -> list[HPolytope]:
        net = problem.network
        C, d = _input_hrep(problem.input)
        S = enumerate_vertices(C, d)
        if S.shape[0] == 0:
            return []
        for i, L in enumerate(net.layers):
            if L.is_relu and L.n_out > self.max_width:
                raise ScaleLimitError(f"layer {i} has width {L.n_out} > {self.max_width}")
            Sh = S @ L.weights.T + L.bias
            if not L.is_relu:
                S = hull_vertices(Sh)
                continue
            active, mixed = _sign_split(Sh)
            parts = []
            for p, bits in _patterns(active, mixed):
                P = Sh
                for j, on in zip(mixed, bits):
                    a = np.zeros(L.n_out)
                    a[j] = -1.0 if on else 1.0
                    P = _clip(P, a, 0.0)
                    if P.shape[0] == 0:
                        break
                if P.shape[0]:
                    parts.append(P * p.astype(float))
            S = hull_vertices(np.vstack(parts))
        return [convex_hull([VPolytope(S)])]

    def solve(self, problem: Problem) -> Result:
        return check_inclusion(self.reachable(problem), problem.output)


@dataclass
class MaxSens(Solver):
    """Box propagation over a grid partition of the input."""

    resolution: float = 1.0
    tight: bool = False

    name = "maxsens"
    input_kinds = ("hyperrectangle", "hpolytope", "vpolytope")
    output_kinds = _REACH_OUT

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")

    def cells(self, box: Hyperrectangle) -> list[Hyperrectangle]:
        axes = []
        for lo, hi in zip(box.low, box.high):
            edges = [lo]
            while hi - edges[-1] > self.resolution * (1 + 1e-12):
                edges.append(edges[-1] + self.resolution)
            edges.append(hi)
            axes.append(list(zip(edges[:-1], edges[1:])))
        out = []
        for combo in itertools.product(*axes):
            lo = np.array([a for a, _ in combo])
            hi = np.array([b for _, b in combo])
            out.append(Hyperrectangle.from_bounds(lo, hi))
        return out

    def forward_box(self, net, box: Hyperrectangle) -> Hyperrectangle:
        c, r = box.center, box.radius
        for L in net.layers:
            mid = L.weights @ c + L.bias
            spread = np.abs(L.weights) @ r
            beta, bmax, bmin = L.act(mid), L.act(mid + spread), L.act(mid - spread)
            if self.tight:
                c, r = (bmax + bmin) / 2, (bmax - bmin) / 2
            else:
                c, r = beta, np.maximum(np.abs(bmax - beta), np.abs(bmin - beta))
        return Hyperrectangle(c, r)

    def reachable(self, problem: Problem) -> list[Hyperrectangle]:
        box = to_box(problem.input)
        out = []
        for cell in self.cells(box):
            check_deadline()
            out.append(self.forward_box(problem.network, cell))
        return out

    def solve(self, problem: Problem) -> Result:
        return check_inclusion(self.reachable(problem), problem.output)


def solve_exactreach(problem: Problem, **params) -> Result:
    return ExactReach(**params).solve(problem)


def solve_ai2(problem: Problem, **params) -> Result:
    return Ai2(**params).solve(problem)


def solve_maxsens(problem: Problem, **params) -> Result:
    return MaxSens(**params).solve(problem)
