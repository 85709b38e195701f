"""Network text files, problem JSON files and report serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .network import Activation, Layer, Network, Problem
from .sets import set_from_dict


class ParseError(ValueError):
    """Malformed input file; line is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.message, self.line, self.source = message, line, source
        where = "" if source is None else f"{source}:"
        where += "" if line is None else f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


def _numbers(text: str, line: int, count: int | None, what: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise ParseError(f"expected comma-separated numbers for {what}, got {text!r}", line) from None
    if count is not None and len(vals) != count:
        raise ParseError(f"{what} has {len(vals)} entries, expected {count}", line)
    if not all(np.isfinite(vals)):
        raise ParseError(f"{what} contains a non-finite value", line)
    return vals


def parse_network(text: str, source: str | None = None) -> Network:
    lines = []
    for no, raw in enumerate(text.splitlines(), start=1):
        s = raw.split("#", 1)[0].strip()
        if s:
            lines.append((no, s))
    try:
        return _parse_lines(lines)
    except ParseError as e:
        if source is not None and e.source is None:
            raise ParseError(e.message, e.line, source) from None
        raise


def _parse_lines(lines) -> Network:
    if not lines:
        raise ParseError("empty network file", 1)
    it = iter(lines)
    no, head = next(it)
    widths = _numbers(head, no, None, "layer widths")
    if len(widths) < 2 or any(w != int(w) or w < 1 for w in widths):
        raise ParseError("layer widths must be at least two positive integers", no)
    widths = [int(w) for w in widths]
    layers = []
    last = no
    for i in range(1, len(widths)):
        try:
            no, act = next(it)
        except StopIteration:
            raise ParseError(f"missing activation line for layer {i}", last + 1) from None
        if act.lower() not in ("relu", "id"):
            raise ParseError(f"unknown activation {act!r}; expected relu or id", no)
        rows = []
        for r in range(widths[i]):
            try:
                no, row = next(it)
            except StopIteration:
                raise ParseError(f"layer {i} is missing weight row {r + 1}", no + 1) from None
            rows.append(_numbers(row, no, widths[i - 1], f"layer {i} weight row {r + 1}"))
        try:
            no, bias = next(it)
        except StopIteration:
            raise ParseError(f"layer {i} is missing its bias line", no + 1) from None
        b = _numbers(bias, no, widths[i], f"layer {i} bias")
        layers.append(Layer(np.array(rows), np.array(b), Activation(act.lower())))
        last = no
    extra = next(it, None)
    if extra is not None:
        raise ParseError("unexpected content after the last layer", extra[0])
    return Network(tuple(layers))


def load_network(path) -> Network:
    path = Path(path)
    return parse_network(path.read_text(), source=str(path))


def format_network(net: Network) -> str:
    out = [",".join(str(w) for w in net.widths)]
    for L in net.layers:
        out.append(L.activation.value)
        out.extend(",".join(repr(float(v)) for v in row) for row in L.weights)
        out.append(",".join(repr(float(v)) for v in L.bias))
    return "\n".join(out) + "\n"


def save_network(net: Network, path) -> None:
    Path(path).write_text(format_network(net))


@dataclass
class ProblemFile:
    problem: Problem
    solver: str | None = None
    params: dict = field(default_factory=dict)


def parse_problem(obj: dict, base_dir=".", network: Network | None = None) -> ProblemFile:
    if not isinstance(obj, dict):
        raise ParseError("problem file must hold a JSON object")
    if network is None:
        if "network" not in obj:
            raise ParseError("field 'network': missing")
        network = load_network(Path(base_dir) / obj["network"])
    sets = {}
    for key in ("input", "output"):
        if key not in obj:
            raise ParseError(f"field {key!r}: missing")
        try:
            sets[key] = set_from_dict(obj[key])
        except KeyError as e:
            raise ParseError(f"field {key!r}: missing key {e}") from None
        except (ValueError, TypeError) as e:
            raise ParseError(f"field {key!r}: {e}") from None
    try:
        problem = Problem(network, sets["input"], sets["output"])
    except ValueError as e:
        raise ParseError(str(e)) from None
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise ParseError("field 'params': expected an object")
    return ProblemFile(problem, obj.get("solver"), dict(params))


def load_problem(path, network: Network | None = None) -> ProblemFile:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, str(path)) from None
    return parse_problem(obj, path.parent, network)


def problem_to_dict(problem: Problem, network_path: str | None = None) -> dict:
    out = {"input": problem.input.to_dict(), "output": problem.output.to_dict()}
    if network_path is not None:
        out = {"network": network_path, **out}
    return out


def dumps(obj) -> str:
    """Stable JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
