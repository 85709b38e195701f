"""A small DPLL satisfiability solver."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Cnf:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        clauses = tuple(tuple(int(l) for l in c) for c in self.clauses)
        for c in clauses:
            if not c:
                raise ValueError("empty clause")
            if any(l == 0 or abs(l) > self.num_vars for l in c):
                raise ValueError(f"literal out of range in clause {c}")
        object.__setattr__(self, "clauses", clauses)

    def with_clause(self, clause) -> "Cnf":
        return Cnf(self.num_vars, self.clauses + (tuple(clause),))

    def satisfied_by(self, assignment) -> bool:
        return all(any(assignment[abs(l) - 1] == (l > 0) for l in c) for c in self.clauses)


def _value(lit: int, assign: dict[int, bool]):
    v = assign.get(abs(lit))
    if v is None:
        return None
    return v if lit > 0 else not v


def _simplify(clauses, assign: dict[int, bool]) -> bool:
    """Unit propagation and pure-literal elimination in place; False on conflict."""
    changed = True
    while changed:
        changed = False
        open_clauses = []
        for c in clauses:
            vals = [_value(l, assign) for l in c]
            if any(v is True for v in vals):
                continue
            free = [l for l, v in zip(c, vals) if v is None]
            if not free:
                return False
            if len(free) == 1:
                assign[abs(free[0])] = free[0] > 0
                changed = True
                break
            open_clauses.append(free)
        if changed:
            continue
        polarity: dict[int, set[bool]] = {}
        for free in open_clauses:
            for l in free:
                polarity.setdefault(abs(l), set()).add(l > 0)
        for var in sorted(polarity):
            if len(polarity[var]) == 1:
                assign[var] = next(iter(polarity[var]))
                changed = True
    return True


def _dpll(clauses, num_vars: int, assign: dict[int, bool]):
    if not _simplify(clauses, assign):
        return None
    pending = [c for c in clauses if not any(_value(l, assign) is True for l in c)]
    if not pending:
        return assign
    var = min(abs(l) for c in pending for l in c if abs(l) not in assign)
    for choice in (True, False):
        trial = dict(assign)
        trial[var] = choice
        found = _dpll(pending, num_vars, trial)
        if found is not None:
            return found
    return None


def sat_solve(cnf: Cnf) -> list[bool] | None:
    """A satisfying assignment (index k holds variable k+1), or None when unsatisfiable."""
    found = _dpll(list(cnf.clauses), cnf.num_vars, {})
    if found is None:
        return None
    return [found.get(v, True) for v in range(1, cnf.num_vars + 1)]
