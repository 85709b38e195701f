"""Verification of input-output properties of small feed-forward ReLU networks."""

from .io import ParseError, load_network, load_problem, parse_network
from .network import Activation, Layer, Network, Problem, Result, Status, forward, validate_counter_example
from .oracle import exact_range, oracle_verify
from .sets import Halfspace, HPolytope, Hyperrectangle, PolytopeComplement, VPolytope
from .solvers import SOLVERS, make_solver


def verify(problem: Problem, solver: str = "nsverify", **params) -> Result:
    """Runs a registered solver after checking its input/output contract."""
    s = make_solver(solver, **params)
    s.check_contract(problem)
    return s.solve(problem)


__version__ = "0.1.0"

__all__ = [
    "Activation",
    "HPolytope",
    "Halfspace",
    "Hyperrectangle",
    "Layer",
    "Network",
    "ParseError",
    "PolytopeComplement",
    "Problem",
    "Result",
    "SOLVERS",
    "Status",
    "VPolytope",
    "exact_range",
    "forward",
    "load_network",
    "load_problem",
    "make_solver",
    "oracle_verify",
    "parse_network",
    "validate_counter_example",
    "verify",
]
