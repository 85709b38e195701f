"""Set vocabulary for input and output constraints, plus the polytope calculus."""

from __future__ import annotations

import itertools
from typing import Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .lp import EQ, LE, LinearModel, add_set_constraint, solve_lp

TAU_SET = 1e-8


class UnsupportedSetOperation(ValueError):
    pass


def _vec(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


def _check_dim(s, x) -> np.ndarray:
    x = _vec(x)
    if x.shape != (s.dim,):
        raise ValueError(f"point of shape {x.shape} for a set of dim {s.dim}")
    return x


class Hyperrectangle:
    def __init__(self, center, radius):
        self.center = _vec(center)
        self.radius = _vec(radius)
        if self.center.shape != self.radius.shape:
            raise ValueError("center and radius differ in length")
        if np.any(self.radius < 0):
            raise ValueError("radius must be nonnegative")

    @classmethod
    def from_bounds(cls, low, high) -> "Hyperrectangle":
        low, high = _vec(low), _vec(high)
        if np.any(low > high):
            raise ValueError("low exceeds high")
        return cls((low + high) / 2, (high - low) / 2)

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def low(self) -> np.ndarray:
        return self.center - self.radius

    @property
    def high(self) -> np.ndarray:
        return self.center + self.radius

    bounded = True

    def member(self, x, tol: float = TAU_SET) -> bool:
        x = _check_dim(self, x)
        return bool(np.all(np.abs(x - self.center) <= self.radius + tol))

    def outside(self, y, tol: float = TAU_SET) -> bool:
        y = _check_dim(self, y)
        return bool(np.any(np.abs(y - self.center) >= self.radius - tol))

    def constraints(self) -> tuple[np.ndarray, np.ndarray]:
        I = np.eye(self.dim)
        return np.vstack([I, -I]), np.concatenate([self.high, -self.low])

    def vertices(self) -> np.ndarray:
        corners = np.array(list(itertools.product((-1.0, 1.0), repeat=self.dim)))
        return np.unique(self.center + corners * self.radius, axis=0)

    def bounding_box(self) -> "Hyperrectangle":
        return self

    def to_hpolytope(self) -> "HPolytope":
        return HPolytope(*self.constraints())

    def to_dict(self) -> dict:
        return {"type": "hyperrectangle", "center": self.center.tolist(), "radius": self.radius.tolist()}

    def __repr__(self):
        return f"Hyperrectangle(low={self.low.tolist()}, high={self.high.tolist()})"


class HPolytope:
    def __init__(self, C, d):
        self.C = np.atleast_2d(np.asarray(C, dtype=float))
        self.d = _vec(d)
        if self.C.shape[0] != self.d.size:
            raise ValueError("C rows and d length differ")
        if self.C.shape[0] < 1:
            raise ValueError("an HPolytope needs at least one constraint")

    @property
    def dim(self) -> int:
        return self.C.shape[1]

    def member(self, x, tol: float = TAU_SET) -> bool:
        x = _check_dim(self, x)
        return bool(np.all(self.C @ x <= self.d + tol))

    def outside(self, y, tol: float = TAU_SET) -> bool:
        y = _check_dim(self, y)
        return bool(np.any(self.C @ y >= self.d - tol))

    def constraints(self):
        return self.C, self.d

    @property
    def bounded(self) -> bool:
        return is_bounded(self)

    def vertices(self) -> np.ndarray:
        return h_to_v(self).vertices()

    def bounding_box(self) -> Hyperrectangle:
        lo, hi = [], []
        for k in range(self.dim):
            vals = []
            for sgn in (1.0, -1.0):
                m = LinearModel()
                x = m.add_vars(self.dim)
                add_set_constraint(m, self, x)
                m.set_objective([x[k]], [sgn], "max")
                out = solve_lp(m)
                if out.status.value == "unbounded":
                    raise UnsupportedSetOperation("unbounded polytope has no bounding box")
                if not out.optimal:
                    raise ValueError("empty polytope has no bounding box")
                vals.append(sgn * out.value)
            hi.append(vals[0])
            lo.append(vals[1])
        return Hyperrectangle.from_bounds(lo, hi)

    def to_dict(self) -> dict:
        return {"type": "hpolytope", "C": self.C.tolist(), "d": self.d.tolist()}

    def __repr__(self):
        return f"HPolytope({self.C.shape[0]} constraints, dim {self.dim})"


class VPolytope:
    def __init__(self, vertices):
        V = np.asarray(vertices, dtype=float)
        if V.ndim == 1:
            V = V[:, None]
        if V.shape[0] < 1:
            raise ValueError("a VPolytope needs at least one vertex")
        self._V = V

    @property
    def dim(self) -> int:
        return self._V.shape[1]

    bounded = True

    def vertices(self) -> np.ndarray:
        return self._V

    def member(self, x, tol: float = TAU_SET) -> bool:
        x = _check_dim(self, x)
        V = self._V
        lo, hi = V.min(axis=0), V.max(axis=0)
        if np.any(x < lo - tol) or np.any(x > hi + tol):
            return False
        if V.shape[0] == 1:
            return bool(np.all(np.abs(x - V[0]) <= tol))
        m = LinearModel()
        lam = m.add_vars(V.shape[0], lower=0.0)
        m.add_constraint(lam, np.ones(lam.size), EQ, 1.0)
        for k in range(self.dim):
            m.add_constraint(lam, V[:, k], LE, x[k] + tol)
            m.add_constraint(lam, -V[:, k], LE, -x[k] + tol)
        return solve_lp(m).optimal

    def outside(self, y, tol: float = TAU_SET) -> bool:
        return not self.member(y, tol=-tol)

    def constraints(self):
        H = v_to_h(self)
        return H.C, H.d

    def bounding_box(self) -> Hyperrectangle:
        return Hyperrectangle.from_bounds(self._V.min(axis=0), self._V.max(axis=0))

    def to_dict(self) -> dict:
        return {"type": "vpolytope", "vertices": self._V.tolist()}

    def __repr__(self):
        return f"VPolytope({self._V.shape[0]} vertices, dim {self.dim})"


class Halfspace:
    def __init__(self, c, d):
        self.c = _vec(c)
        self.d = float(d)
        if not np.any(self.c != 0):
            raise ValueError("halfspace normal must be nonzero")

    @property
    def dim(self) -> int:
        return self.c.size

    bounded = False

    def member(self, x, tol: float = TAU_SET) -> bool:
        x = _check_dim(self, x)
        return bool(self.c @ x <= self.d + tol)

    def outside(self, y, tol: float = TAU_SET) -> bool:
        y = _check_dim(self, y)
        return bool(self.c @ y >= self.d - tol)

    def constraints(self):
        return self.c[None, :], np.array([self.d])

    def to_dict(self) -> dict:
        return {"type": "halfspace", "c": self.c.tolist(), "d": self.d}

    def __repr__(self):
        return f"Halfspace(c={self.c.tolist()}, d={self.d})"


class PolytopeComplement:
    def __init__(self, inner: HPolytope):
        if isinstance(inner, Hyperrectangle):
            inner = inner.to_hpolytope()
        if not isinstance(inner, HPolytope):
            raise TypeError("inner set must be an HPolytope")
        self.inner = inner

    @property
    def dim(self) -> int:
        return self.inner.dim

    bounded = False

    def member(self, x, tol: float = TAU_SET) -> bool:
        x = _check_dim(self, x)
        return not self.inner.member(x, tol=tol)

    def outside(self, y, tol: float = TAU_SET) -> bool:
        return self.inner.member(y, tol=tol)

    def to_dict(self) -> dict:
        return {"type": "polytope_complement", "inner": self.inner.to_dict()}

    def __repr__(self):
        return f"PolytopeComplement({self.inner!r})"


GeometricSet = Union[Hyperrectangle, HPolytope, VPolytope, Halfspace, PolytopeComplement]


def member(s: GeometricSet, x, tol: float = TAU_SET) -> bool:
    return s.member(x, tol=tol)


# ------------------------------------------------------------ vertex calculus


def _dedupe(P: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    if P.shape[0] <= 1:
        return P
    order = np.lexsort(P.T[::-1])
    P = P[order]
    keep = [0]
    for i in range(1, P.shape[0]):
        if not np.any(np.all(np.abs(P[keep] - P[i]) <= tol * (1 + np.abs(P[i])), axis=1)):
            keep.append(i)
    return P[keep]


def enumerate_vertices(C: np.ndarray, d: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Vertices of the bounded polytope {x : C x <= d}, by subset enumeration.

    Every choice of dim constraints whose normals are independent gives a
    candidate point; candidates violating any constraint are discarded.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    d = np.asarray(d, dtype=float)
    m, n = C.shape
    scale = np.linalg.norm(C, axis=1)
    keep = scale > 0
    if np.any(~keep & (d < -tol)):
        return np.zeros((0, n))
    C, d, scale = C[keep] / scale[keep, None], d[keep] / scale[keep], scale[keep]
    C, d = _unique_rows(C, d)
    m = C.shape[0]
    if m < n:
        return np.zeros((0, n))
    combos = np.array(list(itertools.combinations(range(m), n)), dtype=int)
    pts = []
    for chunk in np.array_split(combos, max(1, combos.shape[0] // 20000 + 1)):
        M = C[chunk]
        rhs = d[chunk]
        dets = np.linalg.det(M)
        ok = np.abs(dets) > 1e-10
        if not ok.any():
            continue
        sol = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
        feas = np.all(sol @ C.T <= d + tol * (1 + np.abs(d)), axis=1)
        pts.append(sol[feas])
    if not pts:
        return np.zeros((0, n))
    P = np.vstack(pts)
    return _dedupe(P)


def _unique_rows(C, d):
    key = np.round(np.hstack([C, d[:, None]]), 12)
    _, idx = np.unique(key, axis=0, return_index=True)
    idx = np.sort(idx)
    return C[idx], d[idx]


def is_bounded(p: HPolytope) -> bool:
    """True iff the recession cone {C y <= 0} is trivial (checked by LP per axis)."""
    n = p.dim
    for k in range(n):
        for sgn in (1.0, -1.0):
            m = LinearModel()
            y = m.add_vars(n, lower=-1.0, upper=1.0)
            m.add_rows(y, p.C, LE, np.zeros(p.C.shape[0]))
            m.set_objective([y[k]], [sgn], "max")
            out = solve_lp(m)
            if out.optimal and out.value > 1e-9:
                return False
    return True


def h_to_v(p: HPolytope, check_bounded: bool = True) -> VPolytope:
    if check_bounded and not is_bounded(p):
        raise UnsupportedSetOperation("cannot enumerate the vertices of an unbounded polytope")
    V = enumerate_vertices(p.C, p.d)
    if V.shape[0] == 0:
        raise ValueError("polytope is empty")
    return VPolytope(V)


def _affine_frame(P: np.ndarray, tol: float = 1e-9):
    """Origin, orthonormal basis of the affine hull, and orthonormal complement."""
    p0 = P.mean(axis=0)
    Q = P - p0
    scale = max(1.0, float(np.abs(P).max()))
    if Q.shape[0] == 1 or np.abs(Q).max() <= tol * scale:
        n = P.shape[1]
        return p0, np.zeros((n, 0)), np.eye(n)
    _, s, Vt = np.linalg.svd(Q, full_matrices=True)
    r = int(np.sum(s > tol * scale * max(1.0, np.sqrt(Q.shape[0]))))
    return p0, Vt[:r].T, Vt[r:].T


def hull_vertices(P: np.ndarray) -> np.ndarray:
    """Extreme points of a finite point set (any affine dimension)."""
    P = _dedupe(np.atleast_2d(np.asarray(P, dtype=float)))
    if P.shape[0] <= 2:
        return P
    p0, B, _ = _affine_frame(P)
    r = B.shape[1]
    if r == 0:
        return P[:1]
    Tc = (P - p0) @ B
    if r == 1:
        return P[[int(np.argmin(Tc[:, 0])), int(np.argmax(Tc[:, 0]))]]
    if P.shape[0] <= r + 1:
        return P
    try:
        hull = ConvexHull(Tc)
    except QhullError:
        return P
    return P[np.sort(hull.vertices)]


def v_to_h(p: VPolytope) -> HPolytope:
    """Facet description of conv(vertices); lower-dimensional sets get opposing equality pairs."""
    P = _dedupe(p.vertices())
    n = P.shape[1]
    p0, B, Nc = _affine_frame(P)
    r = B.shape[1]
    rows, rhs = [], []
    for k in range(Nc.shape[1]):
        a = Nc[:, k]
        v = a @ p0
        rows += [a, -a]
        rhs += [v, -v]
    if r == 1:
        a = B[:, 0]
        t = P @ a
        rows += [a, -a]
        rhs += [t.max(), -t.min()]
    elif r >= 2:
        Tc = (P - p0) @ B
        try:
            eq = ConvexHull(Tc).equations
        except QhullError:
            eq = ConvexHull(Tc, qhull_options="QJ").equations
        A = eq[:, :-1] @ B.T
        norms = np.linalg.norm(A, axis=1)
        A = A / norms[:, None]
        b = (P @ A.T).max(axis=0)
        A, b = _unique_rows(np.round(A, 12), np.round(b, 12))
        b = (P @ A.T).max(axis=0)
        rows += list(A)
        rhs += list(b)
    if not rows:
        raise ValueError("cannot describe an empty set")
    return HPolytope(np.array(rows).reshape(-1, n), np.array(rhs))


def vertices_of(s) -> np.ndarray:
    if isinstance(s, HPolytope):
        return h_to_v(s).vertices()
    if isinstance(s, (Hyperrectangle, VPolytope)):
        return s.vertices()
    raise UnsupportedSetOperation(f"{type(s).__name__} is unbounded")


# ------------------------------------------------------------ set relations


def is_empty(p) -> bool:
    if isinstance(p, (Hyperrectangle, VPolytope)):
        return False
    m = LinearModel()
    x = m.add_vars(p.dim)
    add_set_constraint(m, p, x)
    return not solve_lp(m).optimal


def _intersects(a, inner: HPolytope) -> bool:
    m = LinearModel()
    x = m.add_vars(a.dim)
    add_set_constraint(m, a, x)
    add_set_constraint(m, inner, x)
    return solve_lp(m).optimal


def subset(a, b, tol: float = TAU_SET) -> bool:
    """True iff every point of the bounded set a lies in b."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    if isinstance(a, (Halfspace, PolytopeComplement)):
        raise UnsupportedSetOperation("subset needs a bounded left operand")
    if isinstance(a, Hyperrectangle) and isinstance(b, Halfspace):
        return bool(b.c @ a.center + np.abs(b.c) @ a.radius <= b.d + tol)
    if isinstance(a, Hyperrectangle) and isinstance(b, Hyperrectangle):
        return bool(np.all(a.low >= b.low - tol) and np.all(a.high <= b.high + tol))
    V = vertices_of(a)
    if isinstance(b, (Hyperrectangle, HPolytope, Halfspace)):
        C, d = b.constraints()
        return bool(np.all(V @ C.T <= d + tol))
    if isinstance(b, VPolytope):
        return all(b.member(v, tol=tol) for v in V)
    if isinstance(b, PolytopeComplement):
        if any(b.inner.member(v, tol=-tol) for v in V):
            return False
        return not _intersects(a, b.inner)
    raise TypeError(f"unsupported set type {type(b).__name__}")


def affine_image(s, W, b, interval: bool = False):
    """Image of s under x -> W x + b."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    b = _vec(b)
    if W.shape[1] != s.dim:
        raise ValueError("map does not match set dimension")
    if interval:
        if not isinstance(s, Hyperrectangle):
            s = s.bounding_box()
        return Hyperrectangle(W @ s.center + b, np.abs(W) @ s.radius)
    if isinstance(s, (Halfspace, PolytopeComplement)):
        raise UnsupportedSetOperation("image of an unbounded set")
    V = vertices_of(s) @ W.T + b
    if isinstance(s, HPolytope):
        return v_to_h(VPolytope(V))
    return VPolytope(_dedupe(V))


def convex_hull(sets) -> HPolytope:
    sets = list(sets)
    if not sets:
        raise ValueError("convex hull of an empty list")
    V = np.vstack([vertices_of(s) for s in sets])
    return v_to_h(VPolytope(hull_vertices(V)))


def split_interval(dom: Hyperrectangle, i: int) -> tuple[Hyperrectangle, Hyperrectangle]:
    if dom.radius[i] <= 0:
        raise ValueError(f"dimension {i} has zero width and cannot be split")
    r = dom.radius.copy()
    r[i] /= 2
    c1, c2 = dom.center.copy(), dom.center.copy()
    c1[i] -= r[i]
    c2[i] += r[i]
    return Hyperrectangle(c1, r), Hyperrectangle(c2, r.copy())


def to_box(s) -> Hyperrectangle:
    """Smallest axis-aligned box enclosing a bounded set."""
    if isinstance(s, (Halfspace, PolytopeComplement)):
        raise UnsupportedSetOperation("unbounded set has no bounding box")
    return s.bounding_box()


def set_from_dict(obj: dict):
    kind = obj.get("type")
    if kind == "hyperrectangle":
        return Hyperrectangle(obj["center"], obj["radius"])
    if kind == "hpolytope":
        return HPolytope(obj["C"], obj["d"])
    if kind == "halfspace":
        return Halfspace(obj["c"], obj["d"])
    if kind == "polytope_complement":
        return PolytopeComplement(set_from_dict(obj["inner"]))
    if kind == "vpolytope":
        return VPolytope(obj["vertices"])
    raise ValueError(f"unknown set type {kind!r}")
