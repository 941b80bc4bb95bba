import numpy as np
import pytest
from hypothesis import given, strategies as st

from idealknot import geometry as geo
from idealknot.geometry import GeometryError, PolygonalKnot, regular_polygon


def dense_segment_distance(p0, p1, q0, q1, m=401):
    s = np.linspace(0, 1, m)
    P = p0 + s[:, None] * (p1 - p0)
    Q = q0 + s[:, None] * (q1 - q0)
    return np.min(np.linalg.norm(P[:, None] - Q[None], axis=2))


def test_regular_polygon_closed_form():
    for n in range(3, 65):
        rl = geo.ropelength(regular_polygon(n, radius=2.5))
        assert rl == pytest.approx(2 * n * np.tan(np.pi / n), rel=1e-12)


def test_hexagon_breakdown():
    tb = geo.thickness(regular_polygon(6))
    # opposite edges are parallel at distance sqrt(3)
    assert tb.dcsd_half == pytest.approx(np.sqrt(3) / 2, rel=1e-14)
    assert tb.min_rad == pytest.approx(0.5 / np.tan(np.pi / 6), rel=1e-14)
    assert tb.thickness == pytest.approx(np.sqrt(3) / 2)
    assert tb.governed_by == "curvature" or tb.min_rad >= tb.dcsd_half


def test_odd_polygon_dcsd():
    n, R = 9, 1.0
    d = geo.min_strut_distance(regular_polygon(n, R))
    assert d == pytest.approx(R * (1 + np.cos(np.pi / n)), rel=1e-12)
    assert geo.min_strut_distance(regular_polygon(3)) == np.inf


def test_circle_limit():
    assert geo.ropelength(regular_polygon(256)) == pytest.approx(2 * np.pi, abs=1e-3)


def test_similarity_invariance(trefoil96, rng):
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    v = 3.7 * trefoil96.vertices @ q.T + np.array([1.0, -2.0, 5.0])
    assert geo.ropelength(trefoil96.with_vertices(v)) == pytest.approx(
        geo.ropelength(trefoil96), rel=1e-12)


def test_brute_and_grid_agree(trefoil96):
    a = geo.find_struts(trefoil96, 3.0, "brute")
    b = geo.find_struts(trefoil96, 3.0, "grid")
    assert len(a) == len(b) > 0
    assert np.array_equal(a.idx, b.idx)
    assert np.array_equal(a.dist, b.dist)
    assert geo.min_strut_distance(trefoil96, "grid") == \
        geo.min_strut_distance(trefoil96, "brute")


def test_thickness_value_matches(trefoil96, figure_eight96):
    for k in (trefoil96, figure_eight96, regular_polygon(10)):
        assert geo.thickness_value(k) == geo.thickness(k).thickness


def test_reversal_has_zero_radius():
    k = PolygonalKnot(np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0.0]]))
    assert geo.min_radius_of_curvature(k) == 0.0
    with pytest.raises(GeometryError):
        geo.ropelength(k)


def test_bad_input():
    with pytest.raises(GeometryError):
        PolygonalKnot(np.zeros((2, 3)))
    with pytest.raises(GeometryError):
        PolygonalKnot(np.array([[0, 0, 0], [1, 0, np.nan], [0, 1, 0]]))
    with pytest.raises(GeometryError):
        PolygonalKnot(np.zeros((4, 2)))


def test_components():
    a = regular_polygon(8)
    b = regular_polygon(8, center=(5, 0, 0))
    link = PolygonalKnot.from_components([a.vertices, b.vertices])
    assert link.n_components == 2
    assert np.array_equal(link.component(1).vertices, b.vertices)
    # far-apart circles: thickness is the curvature radius
    assert geo.thickness(link).thickness == pytest.approx(
        geo.thickness(a).thickness)


def test_two_component_strut():
    a = regular_polygon(40)
    b = regular_polygon(40, center=(2.5, 0, 0))
    link = PolygonalKnot.from_components([a.vertices, b.vertices])
    d = geo.min_strut_distance(link)
    assert d == pytest.approx(0.5, abs=1e-12)


coords = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
points = st.tuples(coords, coords, coords).map(np.array)


@given(points, points, points, points)
def test_segment_distance_oracle(p0, p1, q0, q1):
    if np.linalg.norm(p1 - p0) < 1e-3 or np.linalg.norm(q1 - q0) < 1e-3:
        return
    d = geo.segment_distance(p0[None], p1[None], q0[None], q1[None])[0]
    oracle = dense_segment_distance(p0, p1, q0, q1)
    # the exact value can only be smaller than the sampled one
    assert d <= oracle + 1e-12
    step = max(np.linalg.norm(p1 - p0), np.linalg.norm(q1 - q0)) / 400
    assert oracle - d <= step + 1e-12


def test_struts_are_critical(trefoil96):
    st_ = geo.find_struts(trefoil96, 4.0)
    v = trefoil96.vertices
    for row in range(len(st_)):
        idx, w = st_.idx[row], st_.w[row]
        p = w[0] * v[idx[0]] + w[1] * v[idx[1]]
        q = -(w[2] * v[idx[2]] + w[3] * v[idx[3]])
        assert np.linalg.norm(p - q) == pytest.approx(st_.dist[row])
        if st_.kind[row] == 0:
            # interior pair: chord perpendicular to both edges
            for a, b in ((idx[0], idx[1]), (idx[2], idx[3])):
                t = v[b] - v[a]
                assert abs(np.dot(t, p - q)) < 1e-9 * np.linalg.norm(t) * st_.dist[row]
