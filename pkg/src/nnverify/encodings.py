"""Linear and mixed-integer encodings of a network, and objective builders.

Every encoding uses one pattern convention: delta = 1 means the node is active.
Pre-activation values are never separate variables; each zhat_j is the
affine expression W_j z_prev + b_j substituted into the rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds import ACTIVE, INACTIVE, LayerBounds, get_bounds, node_status
from .lp import EQ, GE, LE, LinearModel
from .network import Network


@dataclass(frozen=True)
class StandardLP:
    pattern: list


@dataclass(frozen=True)
class LinearRelaxedLP:
    pattern: list


@dataclass(frozen=True)
class SlackLP:
    pattern: list


@dataclass(frozen=True)
class TriangularRelaxedLP:
    bounds: LayerBounds


@dataclass(frozen=True)
class NaiveMIP:
    m: float


@dataclass(frozen=True)
class BoundedMIP:
    bounds: LayerBounds


@dataclass
class Encoded:
    z: list[np.ndarray]
    delta: dict = field(default_factory=dict)
    slack: dict = field(default_factory=dict)


def init_neurons(model: LinearModel, net: Network) -> list[np.ndarray]:
    """Free variables for z_0 .. z_n."""
    return [model.add_vars(w) for w in net.widths]


def default_big_m(net: Network, input_set) -> float:
    b = get_bounds(net, input_set)
    biggest = max(float(np.max(np.abs(np.concatenate([p.low, p.high])))) for p in b.pre)
    return max(1e4, 10.0 * biggest)


class _Rows:
    """Row emitter for one layer: expressions a*z_j + beta*zhat_j + extras."""

    def __init__(self, model: LinearModel, zprev: np.ndarray, W: np.ndarray, b: np.ndarray):
        self.model, self.zprev, self.W, self.b = model, zprev, W, b

    def add(self, j: int, zj: int | None, a: float, beta: float, sense: str, rhs: float, extra=()):
        idx, coef = [], []
        if zj is not None and a != 0:
            idx.append(np.array([zj]))
            coef.append(np.array([a]))
        if beta != 0:
            w = self.W[j]
            nz = w != 0
            idx.append(self.zprev[nz])
            coef.append(beta * w[nz])
        for v, c in extra:
            idx.append(np.array([v]))
            coef.append(np.array([c]))
        idx = np.concatenate(idx) if idx else np.zeros(0, dtype=int)
        coef = np.concatenate(coef) if coef else np.zeros(0)
        self.model.add_constraint(idx, coef, sense, rhs - beta * self.b[j])


def _pattern_layer(pattern, i: int, width: int) -> np.ndarray:
    p = np.asarray(pattern[i], dtype=bool)
    if p.shape != (width,):
        raise ValueError(f"activation pattern for layer {i} has shape {p.shape}, expected ({width},)")
    return p


def encode_network(model: LinearModel, net: Network, kind, z: list[np.ndarray] | None = None) -> Encoded:
    if z is None:
        z = init_neurons(model, net)
    enc = Encoded(z)
    for i, L in enumerate(net.layers):
        rows = _Rows(model, z[i], L.weights, L.bias)
        zc = z[i + 1]
        if not L.is_relu:
            for j in range(L.n_out):
                rows.add(j, zc[j], 1.0, -1.0, EQ, 0.0)
            continue
        _encode_relu_layer(model, rows, zc, i, L.n_out, kind, enc)
    return enc


def _encode_relu_layer(model, rows: _Rows, zc, i, width, kind, enc: Encoded):
    if isinstance(kind, (StandardLP, LinearRelaxedLP)):
        p = _pattern_layer(kind.pattern, i, width)
        strict = isinstance(kind, StandardLP)
        for j in range(width):
            if p[j]:
                rows.add(j, zc[j], 1.0, -1.0, EQ, 0.0)
                if strict:
                    rows.add(j, None, 0.0, 1.0, GE, 0.0)
            else:
                model.add_constraint([zc[j]], [1.0], EQ, 0.0)
                if strict:
                    rows.add(j, None, 0.0, 1.0, LE, 0.0)
    elif isinstance(kind, SlackLP):
        p = _pattern_layer(kind.pattern, i, width)
        for j in range(width):
            s = model.add_var()
            enc.slack[(i, j)] = s
            if p[j]:
                rows.add(j, zc[j], 1.0, -1.0, EQ, 0.0, extra=[(s, -1.0)])
                rows.add(j, None, 0.0, 1.0, GE, 0.0, extra=[(s, 1.0)])
            else:
                model.add_constraint([zc[j], s], [1.0, -1.0], EQ, 0.0)
                rows.add(j, None, 0.0, 1.0, LE, 0.0, extra=[(s, -1.0)])
    elif isinstance(kind, TriangularRelaxedLP):
        lo, hi = _finite_pre(kind.bounds, i)
        st = node_status(lo, hi)
        for j in range(width):
            if st[j] == ACTIVE:
                rows.add(j, zc[j], 1.0, -1.0, EQ, 0.0)
            elif st[j] == INACTIVE:
                model.add_constraint([zc[j]], [1.0], EQ, 0.0)
            else:
                l, u = lo[j], hi[j]
                slope = u / (u - l)
                rows.add(j, zc[j], 1.0, -1.0, GE, 0.0)
                model.add_constraint([zc[j]], [1.0], GE, 0.0)
                rows.add(j, zc[j], 1.0, -slope, LE, -slope * l)
    elif isinstance(kind, NaiveMIP):
        m = float(kind.m)
        for j in range(width):
            d = model.add_var(binary=True)
            enc.delta[(i, j)] = d
            rows.add(j, zc[j], 1.0, -1.0, GE, 0.0)
            model.add_constraint([zc[j]], [1.0], GE, 0.0)
            rows.add(j, zc[j], 1.0, -1.0, LE, m, extra=[(d, m)])
            model.add_constraint([zc[j], d], [1.0, -m], LE, 0.0)
    elif isinstance(kind, BoundedMIP):
        lo, hi = _finite_pre(kind.bounds, i)
        st = node_status(lo, hi)
        for j in range(width):
            if st[j] == ACTIVE:
                rows.add(j, zc[j], 1.0, -1.0, EQ, 0.0)
            elif st[j] == INACTIVE:
                model.add_constraint([zc[j]], [1.0], EQ, 0.0)
            else:
                d = model.add_var(binary=True)
                enc.delta[(i, j)] = d
                rows.add(j, zc[j], 1.0, -1.0, GE, 0.0)
                model.add_constraint([zc[j]], [1.0], GE, 0.0)
                model.add_constraint([zc[j], d], [1.0, -hi[j]], LE, 0.0)
                rows.add(j, zc[j], 1.0, -1.0, LE, -lo[j], extra=[(d, -lo[j])])
    else:
        raise TypeError(f"unknown encoding {type(kind).__name__}")


def _finite_pre(bounds: LayerBounds | None, i: int):
    if bounds is None:
        raise ValueError("this encoding needs node bounds")
    lo, hi = bounds.pre[i].low, bounds.pre[i].high
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError(f"layer {i} has infinite bounds")
    return lo, hi


def parallel_relaxation_bounds(lo: float, hi: float):
    """Slope and (lower, upper) intercepts of the parallel band for an undetermined node."""
    if not lo < 0 < hi:
        raise ValueError("parallel relaxation applies only to undetermined nodes")
    slope = hi / (hi - lo)
    return slope, (0.0, -slope * lo)


# ------------------------------------------------------------------ objectives


def linear_objective(model: LinearModel, ids, c, d: float = 0.0, sense: str = "max") -> None:
    """Objective c @ v - d."""
    model.set_objective(ids, c, sense, constant=-d)


def max_disturbance(model: LinearModel, ids, center) -> int:
    """Minimize the infinity-norm distance of ids from center; returns the epigraph variable."""
    ids = np.asarray(ids, dtype=int)
    center = np.asarray(center, dtype=float)
    t = model.add_var(lower=0.0)
    for v, c in zip(ids, center):
        model.add_constraint([t, v], [1.0, -1.0], GE, -c)
        model.add_constraint([t, v], [1.0, 1.0], GE, c)
    model.set_objective([t], [1.0], "min")
    return t


def sum_objective(model: LinearModel, groups, sense: str) -> None:
    ids = np.concatenate([np.asarray(g, dtype=int) for g in groups])
    model.set_objective(ids, np.ones(ids.size), sense)


def min_sum(model: LinearModel, groups) -> None:
    sum_objective(model, groups, "min")


def max_sum(model: LinearModel, groups) -> None:
    sum_objective(model, groups, "max")


def feasibility(model: LinearModel) -> None:
    model.set_objective([], [], "feasibility")
