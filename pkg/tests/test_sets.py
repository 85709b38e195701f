import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nnverify.sets import (
    Halfspace,
    HPolytope,
    Hyperrectangle,
    PolytopeComplement,
    UnsupportedSetOperation,
    VPolytope,
    affine_image,
    convex_hull,
    enumerate_vertices,
    h_to_v,
    hull_vertices,
    is_bounded,
    is_empty,
    set_from_dict,
    split_interval,
    subset,
    to_box,
    v_to_h,
)

coords = st.floats(-5, 5, allow_nan=False, width=32)


def _same_rows(A, B, tol=1e-7):
    A = A[np.lexsort(np.round(A, 6).T[::-1])]
    B = B[np.lexsort(np.round(B, 6).T[::-1])]
    return A.shape == B.shape and np.allclose(A, B, atol=tol)


class TestHyperrectangle:
    def test_bounds_and_membership(self):
        h = Hyperrectangle.from_bounds([-1, 0], [1, 4])
        assert np.allclose(h.center, [0, 2]) and np.allclose(h.radius, [1, 2])
        assert h.member([1.0, 4.0])
        assert not h.member([1.01, 0.0])

    def test_negative_radius_rejected(self):
        with pytest.raises(ValueError):
            Hyperrectangle([0.0], [-1.0])

    def test_vertices_count(self):
        assert Hyperrectangle(np.zeros(3), np.ones(3)).vertices().shape == (8, 3)

    def test_split(self):
        a, b = split_interval(Hyperrectangle([0.0, 0.0], [1.0, 2.0]), 1)
        assert np.allclose(a.low, [-1, -2]) and np.allclose(a.high, [1, 0])
        assert np.allclose(b.low, [-1, 0]) and np.allclose(b.high, [1, 2])

    def test_split_degenerate(self):
        with pytest.raises(ValueError):
            split_interval(Hyperrectangle([0.0, 0.0], [1.0, 0.0]), 1)


class TestPolytopes:
    def test_triangle_vertices(self):
        V = h_to_v(HPolytope([[1, 0], [0, 1], [-1, -1]], [1, 1, 0])).vertices()
        assert _same_rows(V, np.array([[1.0, -1.0], [-1.0, 1.0], [1.0, 1.0]]))

    def test_unbounded_rejected(self):
        p = HPolytope([[1.0, 0.0]], [1.0])
        assert not is_bounded(p)
        with pytest.raises(UnsupportedSetOperation):
            h_to_v(p)

    def test_emptiness(self):
        assert is_empty(HPolytope([[1.0], [-1.0]], [0.0, -1.0]))
        assert not is_empty(HPolytope([[1.0], [-1.0]], [1.0, 0.0]))

    def test_v_to_h_triangle(self):
        H = v_to_h(VPolytope([[0, 0], [1, 0], [0, 1]]))
        assert H.member([0.2, 0.2]) and not H.member([0.6, 0.6])
        assert H.C.shape[0] == 3

    def test_v_to_h_segment_in_plane(self):
        H = v_to_h(VPolytope([[0, 0], [2, 2]]))
        assert H.member([1, 1]) and not H.member([1, 1.1]) and not H.member([3, 3])

    def test_convex_hull_of_boxes(self):
        H = convex_hull([Hyperrectangle([0.0], [1.0]), Hyperrectangle([3.0], [1.0])])
        assert H.member([1.5]) and H.member([4.0]) and not H.member([4.1])

    def test_vpolytope_member_uses_lp(self):
        V = VPolytope([[0, 0], [1, 0], [0, 1]])
        assert V.member([0.25, 0.25]) and not V.member([0.75, 0.75])


class TestSubset:
    def test_box_in_halfspace(self):
        assert subset(Hyperrectangle([0.0], [1.0]), Halfspace([1.0], 1.0))
        assert not subset(Hyperrectangle([0.0], [1.0]), Halfspace([1.0], 0.9))

    def test_box_in_complement(self):
        Y = PolytopeComplement(HPolytope([[1.0], [-1.0]], [5.0, -2.0]))
        assert subset(Hyperrectangle([0.0], [1.0]), Y)
        assert not subset(Hyperrectangle([1.5], [1.0]), Y)

    def test_unbounded_left_rejected(self):
        with pytest.raises(UnsupportedSetOperation):
            subset(Halfspace([1.0], 0.0), Hyperrectangle([0.0], [1.0]))

    def test_vpolytope_in_vpolytope(self):
        big = VPolytope([[-1, -1], [3, -1], [-1, 3]])
        assert subset(VPolytope([[0, 0], [1, 0], [0, 1]]), big)
        assert not subset(VPolytope([[0, 0], [2, 2]]), big)


def test_affine_image_exact_vs_interval():
    box = Hyperrectangle([0.0, 0.0], [1.0, 1.0])
    W, b = np.array([[1.0, -1.0], [1.0, 1.0]]), np.array([0.0, 1.0])
    exact = affine_image(box, W, b)
    loose = affine_image(box, W, b, interval=True)
    assert isinstance(exact, VPolytope) and isinstance(loose, Hyperrectangle)
    assert subset(exact, loose)
    assert not exact.member([2.0, 3.0])
    assert loose.member([2.0, 3.0])


def test_to_box_rejects_unbounded():
    assert np.allclose(to_box(VPolytope([[0, 0], [2, 1]])).high, [2, 1])
    with pytest.raises(UnsupportedSetOperation):
        to_box(Halfspace([1.0], 0.0))


@pytest.mark.parametrize(
    "s",
    [
        Hyperrectangle([0.5, -1.0], [1.0, 2.0]),
        HPolytope([[1.0, 0.0], [0.0, -1.0]], [1.0, 2.0]),
        VPolytope([[0, 0], [1, 1]]),
        Halfspace([1.0, 2.0], 3.0),
        PolytopeComplement(HPolytope([[1.0, 1.0]], [0.0])),
    ],
)
def test_dict_roundtrip(s):
    back = set_from_dict(s.to_dict())
    assert back.to_dict() == s.to_dict()


def test_unknown_set_type():
    with pytest.raises(ValueError):
        set_from_dict({"type": "zonotope"})


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(3, 8), st.just(2)), elements=coords))
def test_hull_roundtrip_matches_membership(P):
    """v_to_h and the LP membership of the vertex list agree on random probes."""
    V = VPolytope(P)
    H = v_to_h(V)
    probes = np.random.default_rng(0).uniform(-6, 6, (20, 2))
    for x in np.vstack([probes, P]):
        assert H.member(x, tol=1e-6) == V.member(x, tol=1e-6) or _near_boundary(H, x)


def _near_boundary(H, x, tol=1e-5):
    return bool(np.min(np.abs(H.C @ x - H.d)) < tol)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(3, 8), st.just(2)), elements=coords))
def test_hull_vertices_are_input_points_and_enclose_all(P):
    ext = hull_vertices(P)
    for v in ext:
        assert np.any(np.all(np.isclose(P, v), axis=1))
    hull = VPolytope(ext)
    assert all(hull.member(p, tol=1e-6) for p in P)


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, 2, elements=st.floats(-2, 2)),
    arrays(np.float64, 2, elements=st.floats(0.1, 2)),
)
def test_box_vertex_enumeration(center, radius):
    box = Hyperrectangle(center, radius)
    C, d = box.constraints()
    assert _same_rows(enumerate_vertices(C, d), box.vertices())
