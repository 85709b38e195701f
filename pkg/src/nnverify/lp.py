"""Linear models and a bundled dense LP/MILP kernel.

The LP solver is a two-phase tableau simplex using Bland's rule.  The MILP
solver is a depth-first branch and bound over binary variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

TAU_LP = 1e-7
_PIV = 1e-9
_RC = 1e-9
_MAX_PIVOTS = 200_000

LE, EQ, GE = "<=", "==", ">="


class LPStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class SolveOutcome:
    status: LPStatus
    x: np.ndarray | None = None
    value: float | None = None

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL

    def __getitem__(self, ids):
        return self.x[ids]


class LinearModel:
    """Builder for variables, linear constraints and a linear objective."""

    def __init__(self):
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._binary: list[bool] = []
        self._rows: list[tuple[np.ndarray, np.ndarray, str, float]] = []
        self._obj_idx = np.zeros(0, dtype=int)
        self._obj_coef = np.zeros(0)
        self.obj_constant = 0.0
        self.sense = "feasibility"

    @property
    def n_vars(self) -> int:
        return len(self._lb)

    @property
    def n_constraints(self) -> int:
        return len(self._rows)

    @property
    def binaries(self) -> np.ndarray:
        return np.flatnonzero(np.asarray(self._binary, dtype=bool))

    def add_var(self, lower: float = -np.inf, upper: float = np.inf, binary: bool = False) -> int:
        if binary:
            lower, upper = max(0.0, lower), min(1.0, upper)
        if lower > upper:
            raise ValueError(f"empty variable domain [{lower}, {upper}]")
        self._lb.append(float(lower))
        self._ub.append(float(upper))
        self._binary.append(bool(binary))
        return len(self._lb) - 1

    def add_vars(self, n: int, lower=-np.inf, upper=np.inf, binary: bool = False) -> np.ndarray:
        lower = np.broadcast_to(np.asarray(lower, dtype=float), (n,))
        upper = np.broadcast_to(np.asarray(upper, dtype=float), (n,))
        return np.array([self.add_var(lo, hi, binary) for lo, hi in zip(lower, upper)], dtype=int)

    def set_bounds(self, var: int, lower: float | None = None, upper: float | None = None) -> None:
        if lower is not None:
            self._lb[var] = float(lower)
        if upper is not None:
            self._ub[var] = float(upper)

    def bounds(self, var: int) -> tuple[float, float]:
        return self._lb[var], self._ub[var]

    def add_constraint(self, idx, coef, sense: str, rhs: float) -> int:
        if sense not in (LE, EQ, GE):
            raise ValueError(f"unknown relation {sense!r}")
        idx = np.atleast_1d(np.asarray(idx, dtype=int))
        coef = np.atleast_1d(np.asarray(coef, dtype=float))
        if idx.shape != coef.shape:
            raise ValueError("index and coefficient arrays differ in length")
        if idx.size and (idx.min() < 0 or idx.max() >= self.n_vars):
            raise ValueError("constraint references an undeclared variable")
        self._rows.append((idx, coef, sense, float(rhs)))
        return len(self._rows) - 1

    def add_rows(self, ids, A, sense: str, b) -> None:
        """Add the rows A @ x[ids] (sense) b."""
        ids = np.asarray(ids, dtype=int)
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        for row, rhs in zip(A, b):
            nz = row != 0
            self.add_constraint(ids[nz], row[nz], sense, rhs)

    def set_rhs(self, row: int, rhs: float) -> None:
        idx, coef, sense, _ = self._rows[row]
        self._rows[row] = (idx, coef, sense, float(rhs))

    def set_objective(self, idx, coef, sense: str, constant: float = 0.0) -> None:
        if sense not in ("min", "max", "feasibility"):
            raise ValueError(f"unknown objective sense {sense!r}")
        self._obj_idx = np.atleast_1d(np.asarray(idx, dtype=int))
        self._obj_coef = np.atleast_1d(np.asarray(coef, dtype=float))
        self.obj_constant = float(constant)
        self.sense = sense

    def copy(self) -> "LinearModel":
        m = LinearModel()
        m._lb, m._ub, m._binary = list(self._lb), list(self._ub), list(self._binary)
        m._rows = list(self._rows)
        m._obj_idx, m._obj_coef = self._obj_idx.copy(), self._obj_coef.copy()
        m.obj_constant, m.sense = self.obj_constant, self.sense
        return m

    def arrays(self):
        """Dense (c, A, senses, b, lb, ub) with c in minimization form."""
        n = self.n_vars
        A = np.zeros((len(self._rows), n))
        b = np.zeros(len(self._rows))
        senses = []
        for r, (idx, coef, sense, rhs) in enumerate(self._rows):
            np.add.at(A[r], idx, coef)
            b[r] = rhs
            senses.append(sense)
        c = np.zeros(n)
        if self.sense != "feasibility":
            np.add.at(c, self._obj_idx, self._obj_coef)
            if self.sense == "max":
                c = -c
        return c, A, senses, b, np.asarray(self._lb), np.asarray(self._ub)

    def objective_value(self, x: np.ndarray) -> float:
        if self.sense == "feasibility":
            return 0.0
        return float(self._obj_coef @ x[self._obj_idx] + self.obj_constant)

    def max_violation(self, x: np.ndarray) -> float:
        """Largest constraint or bound violation at x."""
        worst = 0.0
        for idx, coef, sense, rhs in self._rows:
            lhs = coef @ x[idx]
            if sense == LE:
                worst = max(worst, lhs - rhs)
            elif sense == GE:
                worst = max(worst, rhs - lhs)
            else:
                worst = max(worst, abs(lhs - rhs))
        lb, ub = np.asarray(self._lb), np.asarray(self._ub)
        if x.size:
            worst = max(worst, float(np.max(lb - x, initial=0.0)), float(np.max(x - ub, initial=0.0)))
        return worst


# ---------------------------------------------------------------- simplex core


def _run_simplex(T: np.ndarray, basis: list[int], ncols: int) -> str:
    """Bland's rule on tableau T whose last row holds reduced costs, last column the rhs.

    Only columns < ncols may enter.  Returns "optimal" or "unbounded".
    """
    m = T.shape[0] - 1
    for _ in range(_MAX_PIVOTS):
        rc = T[m, :ncols]
        cand = np.flatnonzero(rc < -_RC)
        if cand.size == 0:
            return "optimal"
        col = int(cand[0])
        a = T[:m, col]
        pos = np.flatnonzero(a > _PIV)
        if pos.size == 0:
            return "unbounded"
        ratios = T[pos, -1] / a[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, row, col)
        basis[row] = col
    raise RuntimeError("simplex pivot limit reached")


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    f = T[:, col].copy()
    f[row] = 0.0
    T -= np.outer(f, T[row])
    T[:, col] = 0.0
    T[row, col] = 1.0
    rhs = T[:-1, -1]
    rhs[(rhs < 0) & (rhs > -1e-11)] = 0.0


def _standard_form(c, A, senses, b, lb, ub):
    """Rewrite bounds so every working variable is nonnegative.

    Returns (c', A', senses', b', shift, T) with x = shift + T y, y >= 0.
    """
    n = A.shape[1]
    cols, shift = [], np.zeros(n)
    extra_rows, extra_b = [], []
    for j in range(n):
        lo, hi = lb[j], ub[j]
        if np.isfinite(lo):
            shift[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                extra_rows.append(len(cols) - 1)
                extra_b.append(hi - lo)
        elif np.isfinite(hi):
            shift[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    ny = len(cols)
    Tm = np.zeros((n, ny))
    for k, (j, s) in enumerate(cols):
        Tm[j, k] = s
    A2 = A @ Tm
    b2 = b - A @ shift
    if extra_rows:
        B = np.zeros((len(extra_rows), ny))
        B[np.arange(len(extra_rows)), extra_rows] = 1.0
        A2 = np.vstack([A2, B])
        b2 = np.concatenate([b2, extra_b])
        senses = list(senses) + [LE] * len(extra_rows)
    return c @ Tm, A2, list(senses), b2, shift, Tm


def _simplex(c, A, senses, b, lb, ub) -> SolveOutcome:
    """Minimize c @ x subject to A x (senses) b and lb <= x <= ub."""
    n = A.shape[1]
    if np.any(lb > ub + TAU_LP):
        return SolveOutcome(LPStatus.INFEASIBLE)
    cs, As, ss, bs, shift, Tm = _standard_form(c, A, senses, b, lb, ub)
    m, ny = As.shape
    As = As.copy()
    bs = bs.copy()
    ss = list(ss)
    for i in range(m):
        if bs[i] < 0:
            As[i] *= -1
            bs[i] *= -1
            ss[i] = {LE: GE, GE: LE, EQ: EQ}[ss[i]]
    n_slack = sum(s != EQ for s in ss)
    n_art = sum(s != LE for s in ss)
    N = ny + n_slack + n_art
    T = np.zeros((m + 1, N + 1))
    T[:m, :ny] = As
    T[:m, -1] = bs
    basis = [0] * m
    k_s, k_a = ny, ny + n_slack
    art_cols = []
    for i, s in enumerate(ss):
        if s == LE:
            T[i, k_s] = 1.0
            basis[i] = k_s
            k_s += 1
        else:
            if s == GE:
                T[i, k_s] = -1.0
                k_s += 1
            T[i, k_a] = 1.0
            basis[i] = k_a
            art_cols.append(k_a)
            k_a += 1
    first_art = ny + n_slack

    if art_cols:
        cost = np.zeros(N)
        cost[first_art:] = 1.0
        T[m, :N] = cost
        T[m, -1] = 0.0
        for i in range(m):
            if basis[i] >= first_art:
                T[m] -= T[i]
        _run_simplex(T, basis, N)
        if -T[m, -1] > TAU_LP:
            return SolveOutcome(LPStatus.INFEASIBLE)
        keep = []
        for i in range(m):
            if basis[i] >= first_art:
                row = T[i, :first_art]
                nz = np.flatnonzero(np.abs(row) > _PIV)
                if nz.size:
                    _pivot(T, i, int(nz[0]))
                    basis[i] = int(nz[0])
                    keep.append(i)
            else:
                keep.append(i)
        T = np.vstack([T[keep][:, list(range(first_art)) + [N]], np.zeros((1, first_art + 1))])
        basis = [basis[i] for i in keep]
        m = len(keep)
        N = first_art

    cost = np.zeros(N)
    cost[:ny] = cs
    T[m, :N] = cost
    T[m, -1] = 0.0
    for i in range(m):
        if cost[basis[i]] != 0.0:
            T[m] -= cost[basis[i]] * T[i]
    status = _run_simplex(T, basis, N)
    if status == "unbounded":
        return SolveOutcome(LPStatus.UNBOUNDED)
    y = np.zeros(N)
    y[basis] = T[:m, -1]
    y = np.maximum(y, 0.0)
    x = shift + Tm @ y[:ny]
    return SolveOutcome(LPStatus.OPTIMAL, x, float(c @ x))


def solve_lp(model: LinearModel) -> SolveOutcome:
    """Solve the continuous relaxation of model (binaries relaxed to [0, 1])."""
    c, A, senses, b, lb, ub = model.arrays()
    return _finish(model, _simplex(c, A, senses, b, lb, ub))


def _finish(model: LinearModel, out: SolveOutcome) -> SolveOutcome:
    if not out.optimal:
        return out
    return SolveOutcome(LPStatus.OPTIMAL, out.x, model.objective_value(out.x))


def solve_milp(model: LinearModel, gap: float = TAU_LP) -> SolveOutcome:
    """Depth-first branch and bound; branches on the binary closest to 0.5."""
    c, A, senses, b, lb0, ub0 = model.arrays()
    bins = model.binaries
    if bins.size == 0:
        return _finish(model, _simplex(c, A, senses, b, lb0, ub0))
    feasibility = model.sense == "feasibility"
    best: SolveOutcome | None = None
    stack = [(lb0.copy(), ub0.copy())]
    while stack:
        lb, ub = stack.pop()
        out = _simplex(c, A, senses, b, lb, ub)
        if out.status is LPStatus.UNBOUNDED:
            return out
        if not out.optimal:
            continue
        if best is not None and out.value >= best.value - gap:
            continue
        vals = out.x[bins]
        frac = np.abs(vals - np.round(vals)) > TAU_LP
        if not frac.any():
            lbf, ubf = lb.copy(), ub.copy()
            lbf[bins] = ubf[bins] = np.round(vals)
            polished = _simplex(c, A, senses, b, lbf, ubf)
            best = polished if polished.optimal else out
            if feasibility:
                break
            continue
        cand = np.flatnonzero(frac)
        dist = np.abs(vals[cand] - 0.5)
        j = int(bins[cand[np.flatnonzero(dist <= dist.min() + 1e-12)[0]]])
        lo_child = (lb.copy(), ub.copy())
        lo_child[1][j] = 0.0
        hi_child = (lb.copy(), ub.copy())
        hi_child[0][j] = 1.0
        stack.append(lo_child)
        stack.append(hi_child)
    if best is None:
        return SolveOutcome(LPStatus.INFEASIBLE)
    return _finish(model, best)


def solve(model: LinearModel) -> SolveOutcome:
    return solve_milp(model) if model.binaries.size else solve_lp(model)


# ------------------------------------------------------------ set constraints


def add_set_constraint(model: LinearModel, s, ids) -> None:
    """Constrain model variables ids to lie in the convex set s."""
    from .sets import Halfspace, HPolytope, Hyperrectangle, PolytopeComplement, VPolytope

    ids = np.asarray(ids, dtype=int)
    if s.dim != ids.size:
        raise ValueError(f"set of dim {s.dim} applied to {ids.size} variables")
    if isinstance(s, PolytopeComplement):
        raise TypeError("a polytope complement is not convex and cannot be added as a constraint")
    if isinstance(s, Hyperrectangle):
        I = np.eye(s.dim)
        model.add_rows(ids, I, LE, s.high)
        model.add_rows(ids, -I, LE, -s.low)
    elif isinstance(s, (HPolytope, Halfspace)):
        C, d = s.constraints()
        model.add_rows(ids, C, LE, d)
    elif isinstance(s, VPolytope):
        V = s.vertices()
        lam = model.add_vars(V.shape[0], lower=0.0)
        model.add_constraint(lam, np.ones(lam.size), EQ, 1.0)
        for k in range(s.dim):
            model.add_constraint(np.concatenate([[ids[k]], lam]), np.concatenate([[1.0], -V[:, k]]), EQ, 0.0)
    else:
        raise TypeError(f"unsupported set type {type(s).__name__}")


def add_complement_constraint(model: LinearModel, s, ids) -> None:
    """Constrain ids to the closure of the complement of s (which must be convex)."""
    from .sets import Halfspace, PolytopeComplement

    ids = np.asarray(ids, dtype=int)
    if s.dim != ids.size:
        raise ValueError(f"set of dim {s.dim} applied to {ids.size} variables")
    if isinstance(s, Halfspace):
        model.add_rows(ids, s.c[None, :], GE, [s.d])
    elif isinstance(s, PolytopeComplement):
        model.add_rows(ids, s.inner.C, LE, s.inner.d)
    else:
        raise TypeError(f"the complement of a {type(s).__name__} is not convex")
