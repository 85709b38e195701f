"""Interval bounds, pointwise gradients and gradient bounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import Network
from .sets import Hyperrectangle, to_box

ACTIVE, INACTIVE, UNDETERMINED = 1, -1, 0


def interval_map(W, l, u):
    """Bounds of W x for x in [l, u]; l and u may be vectors or matrices."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    l, u = np.asarray(l, dtype=float), np.asarray(u, dtype=float)
    Wp, Wn = np.maximum(W, 0), np.minimum(W, 0)
    return Wp @ l + Wn @ u, Wp @ u + Wn @ l


@dataclass(frozen=True)
class LayerBounds:
    """post[0] is the input box, post[i] bounds z_i; pre[i-1] bounds zhat_i."""

    post: tuple[Hyperrectangle, ...]
    pre: tuple[Hyperrectangle, ...]

    def pre_low(self, i: int) -> np.ndarray:
        return self.pre[i].low

    def pre_high(self, i: int) -> np.ndarray:
        return self.pre[i].high

    @property
    def output(self) -> Hyperrectangle:
        return self.post[-1]


def node_status(lo, hi) -> np.ndarray:
    """+1 for provably active, -1 for provably inactive, 0 otherwise (zero width at 0 is inactive)."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    st = np.zeros(lo.shape, dtype=int)
    st[lo >= 0] = ACTIVE
    st[hi <= 0] = INACTIVE
    return st


def classify_nodes(bounds: LayerBounds, layer: int):
    """Index arrays (active, inactive, undetermined) for layer (0-based over network layers)."""
    st = node_status(bounds.pre[layer].low, bounds.pre[layer].high)
    return np.flatnonzero(st == ACTIVE), np.flatnonzero(st == INACTIVE), np.flatnonzero(st == UNDETERMINED)


def get_bounds(net: Network, input_set) -> LayerBounds:
    """Layer-wise interval propagation from the bounding box of input_set."""
    box = to_box(input_set)
    lo, hi = box.low, box.high
    post, pre = [box], []
    for L in net.layers:
        pl, pu = interval_map(L.weights, lo, hi)
        pl, pu = pl + L.bias, pu + L.bias
        pre.append(Hyperrectangle.from_bounds(pl, pu))
        lo, hi = L.act(pl), L.act(pu)
        post.append(Hyperrectangle.from_bounds(lo, hi))
    return LayerBounds(tuple(post), tuple(pre))


def get_gradient(net: Network, x) -> np.ndarray:
    """Jacobian dy/dx at x; at a kink the ReLU derivative is taken as 0."""
    _, pre = net.trace(x)
    G = np.eye(net.n_inputs)
    for L, zh in zip(net.layers, pre):
        G = L.weights @ G
        if L.is_relu:
            G = (zh > 0).astype(float)[:, None] * G
    return G


@dataclass(frozen=True)
class GradientBounds:
    LG: np.ndarray
    UG: np.ndarray
    lam_low: tuple[np.ndarray, ...]
    lam_up: tuple[np.ndarray, ...]


def activation_masks(net: Network, bounds: LayerBounds):
    """Bounds on the ReLU derivative per node: (1,1) active, (0,0) inactive, (0,1) otherwise."""
    lows, ups = [], []
    for i, L in enumerate(net.layers):
        if not L.is_relu:
            lows.append(np.ones(L.n_out))
            ups.append(np.ones(L.n_out))
            continue
        st = node_status(bounds.pre[i].low, bounds.pre[i].high)
        lows.append((st == ACTIVE).astype(float))
        ups.append((st != INACTIVE).astype(float))
    return lows, ups


def gradient_bounds_from_masks(net: Network, lam_low, lam_up) -> GradientBounds:
    LG = UG = np.eye(net.n_inputs)
    for L, al, au in zip(net.layers, lam_low, lam_up):
        Gl, Gu = interval_map(L.weights, LG, UG)
        al, au = al[:, None], au[:, None]
        LG = al * np.maximum(Gl, 0) + au * np.minimum(Gl, 0)
        UG = al * np.minimum(Gu, 0) + au * np.maximum(Gu, 0)
    return GradientBounds(LG, UG, tuple(lam_low), tuple(lam_up))


def get_gradient_bounds(net: Network, input_set) -> GradientBounds:
    lows, ups = activation_masks(net, get_bounds(net, input_set))
    return gradient_bounds_from_masks(net, lows, ups)
