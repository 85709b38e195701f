"""Random desk-scale instances and the grouped benchmark runner."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .network import Activation, Layer, Network, Problem, Result, Status
from .oracle import exact_range, oracle_verify
from .sets import Halfspace, HPolytope, Hyperrectangle, PolytopeComplement
from .solvers import make_solver
from .solvers.base import ContractError, SolverTimeout, time_limit

GROUPS: dict[int, tuple[str, ...]] = {
    1: ("ai2", "exactreach", "maxsens"),
    2: ("ilp", "mipverify", "nsverify"),
    3: ("duality", "convdual"),
    4: ("fastlin", "fastlip", "ilp", "mipverify"),
    5: ("bab", "dlv", "reluval", "sherlock"),
    6: ("planet", "reluplex", "reluval"),
}

# property form used by each group: "hs", "pc", "hp" (bounded) or "hr" (1-D interval)
GROUP_FORMS = {1: "hp", 2: "pc", 3: "hs", 4: "hs", 5: "hr", 6: "pc"}


def random_network(rng: np.random.Generator, n_in: int | None = None, max_relu: int = 12) -> Network:
    """Dense ReLU net with 1-3 hidden layers of width 2-4 and one identity output."""
    n_in = int(rng.integers(1, 4)) if n_in is None else n_in
    depth = int(rng.integers(1, 4))
    widths = [n_in]
    for _ in range(depth):
        w = int(rng.integers(2, 5))
        if sum(widths[1:]) + w > max_relu:
            break
        widths.append(w)
    layers = [
        Layer(rng.uniform(-2, 2, (b, a)), rng.uniform(-2, 2, b), Activation.RELU)
        for a, b in zip(widths[:-1], widths[1:])
    ]
    layers.append(Layer(rng.uniform(-2, 2, (1, widths[-1])), rng.uniform(-2, 2, 1), Activation.ID))
    return Network(tuple(layers))


def random_box(rng: np.random.Generator, n: int) -> Hyperrectangle:
    return Hyperrectangle(rng.uniform(-1, 1, n), np.full(n, rng.uniform(0.2, 1.0)))


@dataclass
class Instance:
    problem: Problem
    holds_by_design: bool
    form: str
    sign: float
    threshold: float
    range: tuple[float, float]


def output_set(form: str, sign: float, d: float, lo: float, hi: float):
    """Set Y encoding sign * y <= d, shaped per form; lo/hi is the exact range of y."""
    if form == "hs":
        return Halfspace([sign], d)
    if form == "pc":
        # Y is the complement of {sign * y >= d}
        return PolytopeComplement(HPolytope([[-sign]], [-d]))
    span = hi - lo
    if form == "hp":
        return HPolytope([[sign], [1.0], [-1.0]], [d, hi + 1.0, -(lo - 1.0)])
    if form == "hr":
        if sign > 0:
            return Hyperrectangle.from_bounds([lo - 1.0 - span], [d])
        return Hyperrectangle.from_bounds([-d], [hi + 1.0 + span])
    raise ValueError(f"unknown property form {form!r}")


def random_instance(rng: np.random.Generator, form: str, polytope_input: bool = False) -> Instance:
    """Instance whose threshold sits clearly above the range (holds) or inside it (violated)."""
    net = random_network(rng)
    box = random_box(rng, net.n_inputs)
    lo, hi, _, _ = exact_range(net, box)
    sign = float(rng.choice([-1.0, 1.0]))
    slo, shi = (lo, hi) if sign > 0 else (-hi, -lo)
    span = shi - slo
    want_holds = bool(rng.random() < 0.5) or span < 1e-3
    if want_holds:
        d = shi + rng.uniform(0.05, 0.3) * max(span, 0.1)
    else:
        d = slo + rng.uniform(0.2, 0.8) * span
    Y = output_set(form, sign, float(d), lo, hi)
    X = box.to_hpolytope() if polytope_input else box
    return Instance(Problem(net, X, Y), want_holds, form, sign, float(d), (lo, hi))


def instance_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng([seed, *key])


def group_instances(group: int, count: int, seed: int) -> list[Instance]:
    form = GROUP_FORMS[group]
    return [random_instance(instance_rng(seed, group, k), form, polytope_input=group == 1) for k in range(count)]


@dataclass
class RunRecord:
    solver: str
    status: str
    payload: dict
    time_s: float | None
    oracle_status: str | None = None

    @property
    def agree(self) -> bool | None:
        if self.oracle_status is None:
            return None
        return self.status == self.oracle_status or self.status == Status.UNKNOWN.value

    def to_dict(self) -> dict:
        return {
            "solver": self.solver,
            "status": self.status,
            "payload": self.payload,
            "time_s": self.time_s,
            "oracle_status": self.oracle_status,
            "agree": self.agree,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "RunRecord":
        return cls(obj["solver"], obj["status"], obj["payload"], obj["time_s"], obj.get("oracle_status"))


def run_solver(name: str, problem: Problem, params: dict | None = None, timeout: float | None = None):
    """(Result, seconds) for one solver run; contract and time-limit failures become unknown."""
    solver = make_solver(name, **(params or {}))
    t0 = time.perf_counter()
    try:
        solver.check_contract(problem)
        with time_limit(timeout):
            res = solver.solve(problem)
    except ContractError as e:
        res = Result(Status.UNKNOWN, info={"contract_error": str(e)})
    except SolverTimeout:
        res = Result(Status.UNKNOWN, info={"timeout": True})
    return res, time.perf_counter() - t0


def run_group(group: int, count: int, seed: int, timings: bool = False, timeout: float | None = None) -> dict:
    if group not in GROUPS:
        raise ValueError(f"group must be one of {sorted(GROUPS)}")
    instances = []
    summary = {s: {"runs": 0, "agree": 0, "unknown": 0, "unsound_holds": 0, "time_s": 0.0} for s in GROUPS[group]}
    for k, inst in enumerate(group_instances(group, count, seed)):
        oracle = oracle_verify(inst.problem).status.value
        runs = []
        for name in GROUPS[group]:
            res, dt = run_solver(name, inst.problem, timeout=timeout)
            rec = RunRecord(name, res.status.value, _round_payload(res.payload()), round(dt, 6) if timings else None, oracle)
            runs.append(rec.to_dict())
            row = summary[name]
            row["runs"] += 1
            row["agree"] += int(bool(rec.agree))
            row["unknown"] += int(rec.status == "unknown")
            row["unsound_holds"] += int(rec.status == "holds" and oracle == "violated")
            row["time_s"] += dt
        instances.append(
            {
                "index": k,
                "widths": inst.problem.network.widths,
                "form": inst.form,
                "oracle_status": oracle,
                "runs": runs,
            }
        )
    for row in summary.values():
        row["time_s"] = round(row["time_s"], 6) if timings else None
    return {"group": group, "count": count, "seed": seed, "solvers": list(GROUPS[group]), "instances": instances, "summary": summary}


def _round_payload(obj, digits: int = 12):
    """Rounds floats so reports do not depend on last-bit noise."""
    if isinstance(obj, float):
        return round(obj, digits)
    if isinstance(obj, list):
        return [_round_payload(v, digits) for v in obj]
    if isinstance(obj, dict):
        return {k: _round_payload(v, digits) for k, v in obj.items()}
    return obj


def format_table(report: dict) -> str:
    head = f"{'solver':<11} {'runs':>5} {'agree':>6} {'unknown':>8} {'unsound':>8} {'time_s':>9}"
    lines = [f"group {report['group']}  count {report['count']}  seed {report['seed']}", head]
    for name, row in report["summary"].items():
        t = "-" if row["time_s"] is None else f"{row['time_s']:.3f}"
        lines.append(
            f"{name:<11} {row['runs']:>5} {row['agree']:>6} {row['unknown']:>8} {row['unsound_holds']:>8} {t:>9}"
        )
    return "\n".join(lines)
