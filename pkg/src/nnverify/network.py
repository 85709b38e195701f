"""Feedforward networks, problems and results."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np


class Activation(str, Enum):
    RELU = "relu"
    ID = "id"


class Status(str, Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    UNKNOWN = "unknown"


def relu(v):
    return np.maximum(np.asarray(v, dtype=float), 0.0)


def _apply(act: Activation, v: np.ndarray) -> np.ndarray:
    return relu(v) if act is Activation.RELU else np.asarray(v, dtype=float)


@dataclass(frozen=True)
class Layer:
    weights: np.ndarray
    bias: np.ndarray
    activation: Activation = Activation.RELU

    def __post_init__(self):
        W = np.atleast_2d(np.asarray(self.weights, dtype=float))
        b = np.atleast_1d(np.asarray(self.bias, dtype=float))
        if W.shape[0] != b.shape[0]:
            raise ValueError(f"weight rows ({W.shape[0]}) != bias length ({b.shape[0]})")
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
            raise ValueError("layer parameters must be finite")
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "bias", b)
        object.__setattr__(self, "activation", Activation(self.activation))

    @property
    def n_in(self) -> int:
        return self.weights.shape[1]

    @property
    def n_out(self) -> int:
        return self.weights.shape[0]

    def affine(self, z: np.ndarray) -> np.ndarray:
        return self.weights @ z + self.bias

    def act(self, zhat: np.ndarray) -> np.ndarray:
        return _apply(self.activation, zhat)

    @property
    def is_relu(self) -> bool:
        return self.activation is Activation.RELU


@dataclass(frozen=True)
class Network:
    layers: tuple[Layer, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("a network needs at least one layer")
        for i in range(1, len(layers)):
            if layers[i].n_in != layers[i - 1].n_out:
                raise ValueError(
                    f"layer {i} expects width {layers[i].n_in}, previous layer gives {layers[i - 1].n_out}"
                )
        object.__setattr__(self, "layers", layers)

    @property
    def widths(self) -> list[int]:
        return [self.layers[0].n_in] + [L.n_out for L in self.layers]

    @property
    def n_inputs(self) -> int:
        return self.layers[0].n_in

    @property
    def n_outputs(self) -> int:
        return self.layers[-1].n_out

    @property
    def n_relu(self) -> int:
        return sum(L.n_out for L in self.layers if L.is_relu)

    def __len__(self) -> int:
        return len(self.layers)

    def _check_input(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.n_inputs,):
            raise ValueError(f"input of shape {x.shape}, expected ({self.n_inputs},)")
        return x

    def trace(self, x) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Post-activation values z_0..z_n and pre-activation values zhat_1..zhat_n."""
        z = self._check_input(x)
        post, pre = [z], []
        for L in self.layers:
            zh = L.affine(z)
            z = L.act(zh)
            pre.append(zh)
            post.append(z)
        return post, pre

    def forward(self, x) -> np.ndarray:
        z = self._check_input(x)
        for L in self.layers:
            z = L.act(L.affine(z))
        return z

    def truncated(self, n_layers: int) -> "Network":
        return Network(self.layers[:n_layers])


def forward(net: Network, x) -> np.ndarray:
    return net.forward(x)


def get_activation(net: Network, x) -> list[np.ndarray]:
    """Per-layer activation pattern; a pre-activation of exactly zero counts as inactive."""
    _, pre = net.trace(x)
    return [zh > 0 if L.is_relu else np.ones(L.n_out, dtype=bool) for L, zh in zip(net.layers, pre)]


def node_ids(net: Network) -> list[tuple[int, int]]:
    """(layer, node) pairs of every ReLU node, in layer then node order."""
    return [(i, j) for i, L in enumerate(net.layers) if L.is_relu for j in range(L.n_out)]


@dataclass
class Problem:
    network: Network
    input: Any
    output: Any

    def __post_init__(self):
        if self.input.dim != self.network.n_inputs:
            raise ValueError(f"input set has dim {self.input.dim}, network takes {self.network.n_inputs}")
        if self.output.dim != self.network.n_outputs:
            raise ValueError(f"output set has dim {self.output.dim}, network gives {self.network.n_outputs}")


@dataclass
class Result:
    status: Status
    counter_example: np.ndarray | None = None
    max_disturbance: float | None = None
    reachable: list | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.status = Status(self.status)
        if self.counter_example is not None:
            self.counter_example = np.asarray(self.counter_example, dtype=float)

    @property
    def kind(self) -> str:
        if self.counter_example is not None:
            return "counter_example"
        if self.max_disturbance is not None:
            return "adversarial"
        if self.reachable is not None:
            return "reachability"
        return "basic"

    def payload(self) -> dict:
        out: dict[str, Any] = {}
        if self.counter_example is not None:
            out["counter_example"] = [float(v) for v in self.counter_example]
        if self.max_disturbance is not None:
            out["max_disturbance"] = float(self.max_disturbance)
        if self.reachable is not None:
            out["reachable"] = [s.to_dict() for s in self.reachable]
        return out


def validate_counter_example(problem: Problem, x, tol: float = 1e-9) -> bool:
    """True when x lies in the input set and its image lies in the closed complement of the output set."""
    x = np.asarray(x, dtype=float)
    if not problem.input.member(x, tol=tol):
        return False
    return problem.output.outside(problem.network.forward(x), tol=tol)
