"""Solver registry."""

from __future__ import annotations

from .base import ContractError, Solver
from .dual import ConvDual, Duality
from .primal import ILP, MIPVerify, NSVerify
from .reach import Ai2, ExactReach, MaxSens
from .search import BaB, Planet, Reluplex, Sherlock
from .symbolic import DLV, FastLin, FastLip, ReluVal

SOLVERS: dict[str, type[Solver]] = {
    cls.name: cls
    for cls in (
        ExactReach,
        Ai2,
        MaxSens,
        NSVerify,
        MIPVerify,
        ILP,
        Duality,
        ConvDual,
        ReluVal,
        FastLin,
        FastLip,
        DLV,
        Sherlock,
        BaB,
        Planet,
        Reluplex,
    )
}


def make_solver(name: str, **params) -> Solver:
    try:
        cls = SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {', '.join(sorted(SOLVERS))}") from None
    return cls(**params)


__all__ = ["SOLVERS", "ContractError", "Solver", "make_solver", *(c.__name__ for c in SOLVERS.values())]
