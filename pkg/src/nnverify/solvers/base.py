"""Shared solver plumbing."""

from __future__ import annotations

import contextlib
import contextvars
import dataclasses
import time

import numpy as np

from ..network import Problem, Result, Status, validate_counter_example
from ..sets import Halfspace, HPolytope, Hyperrectangle, PolytopeComplement, VPolytope

SET_KINDS = {
    Hyperrectangle: "hyperrectangle",
    HPolytope: "hpolytope",
    VPolytope: "vpolytope",
    Halfspace: "halfspace",
    PolytopeComplement: "polytope_complement",
}


def set_kind(s) -> str:
    return SET_KINDS[type(s)]


class ContractError(TypeError):
    """The problem's input or output set is outside what the solver accepts."""


class Solver:
    """Base for all solvers: parameters are dataclass fields, work happens in solve()."""

    name = "solver"
    input_kinds: tuple[str, ...] = ()
    output_kinds: tuple[str, ...] = ()
    complete = False

    def get_params(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}

    def set_params(self, **params) -> "Solver":
        names = {f.name for f in dataclasses.fields(self)}
        for k, v in params.items():
            if k not in names:
                raise ValueError(f"{self.name} has no parameter {k!r}")
            setattr(self, k, v)
        return self

    def check_contract(self, problem: Problem) -> None:
        ik, ok = set_kind(problem.input), set_kind(problem.output)
        if ik not in self.input_kinds:
            raise ContractError(f"{self.name} does not accept a {ik} input set")
        if ok not in self.output_kinds:
            raise ContractError(f"{self.name} does not accept a {ok} output set")
        self._check_extra(problem)

    def _check_extra(self, problem: Problem) -> None:
        pass

    def solve(self, problem: Problem) -> Result:
        raise NotImplementedError

    def __call__(self, problem: Problem) -> Result:
        return self.solve(problem)


class SolverTimeout(RuntimeError):
    pass


_deadline: contextvars.ContextVar[float | None] = contextvars.ContextVar("deadline", default=None)


@contextlib.contextmanager
def time_limit(seconds: float | None):
    """Cooperative limit: search loops call check_deadline() between major iterations."""
    token = _deadline.set(None if seconds is None else time.monotonic() + seconds)
    try:
        yield
    finally:
        _deadline.reset(token)


def check_deadline() -> None:
    end = _deadline.get()
    if end is not None and time.monotonic() > end:
        raise SolverTimeout("time limit reached")


def counter_example_result(problem: Problem, x, **info) -> Result:
    """Violated result for x after snapping it into the input box; unknown if it does not re-verify."""
    x = np.asarray(x, dtype=float)
    if isinstance(problem.input, Hyperrectangle):
        x = np.clip(x, problem.input.low, problem.input.high)
    if validate_counter_example(problem, x):
        return Result(Status.VIOLATED, counter_example=x, info=info)
    return Result(Status.UNKNOWN, info={**info, "rejected_counter_example": x.tolist()})


def uniform_radius(box: Hyperrectangle, tol: float = 1e-12) -> float:
    r = box.radius
    if r.size and np.max(r) - np.min(r) > tol * max(1.0, float(np.max(r))):
        raise ContractError("input box must have the same radius in every dimension")
    return float(r.max()) if r.size else 0.0


def halfspace_of(output) -> tuple[np.ndarray, float]:
    if not isinstance(output, Halfspace):
        raise ContractError("output set must be a halfspace")
    return output.c, output.d
