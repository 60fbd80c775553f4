import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from su2splice.errors import LiftObstructed, PointOnCurve, TangencyUnresolved
from su2splice.pillowcase import (SIGMA, TAU, Polyline, canonical_array, components_of_complement, hausdorff,
                                  intersect_polylines, intersection_number, lift_to_cut_open, line_L,
                                  line_L_pi_segments, normalize, on_line_mod_pi, quotient_distance,
                                  read_polylines_csv, sigma, tau, write_polylines_csv)

PI = math.pi


def vertical(alpha, n=201):
    b = np.linspace(0.0, 2 * PI, n)
    return Polyline.from_points(np.stack([np.full_like(b, alpha), b], -1)[:-1], closed=True)


def test_normalize_examples():
    assert normalize(-PI / 3, PI / 2).as_tuple() == pytest.approx((PI / 3, 3 * PI / 2))
    assert normalize(PI / 2, 2 * PI).as_tuple() == pytest.approx((PI / 2, 0.0))
    assert normalize(0.0, 3 * PI / 2).as_tuple() == pytest.approx((0.0, PI / 2))


def test_sigma_tau_examples():
    assert sigma((PI / 2, 0.0)).as_tuple() == pytest.approx((PI / 2, 0.0))
    assert sigma((PI / 4, 0.0)).as_tuple() == pytest.approx((PI / 4, PI))
    assert tau((0.0, PI)).as_tuple() == pytest.approx((PI, PI))
    assert tau((PI / 2, 0.0)).as_tuple() == pytest.approx((PI / 2, 0.0))
    assert tau((PI / 2, PI)).as_tuple() == pytest.approx((PI / 2, PI))


def test_tau_swaps_corners():
    assert quotient_distance(tau((0.0, 0.0)).as_tuple(), (PI, 0.0)) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10))
def test_quotient_distance_is_invariant(a, b):
    p = (a, b)
    for q in [(-a, -b), (a + 2 * PI, b), (a, b - 2 * PI)]:
        assert quotient_distance(p, q) < 1e-9
    c = canonical_array(p)[0]
    assert 0.0 <= c[0] <= PI and 0.0 <= c[1] < 2 * PI


def test_on_line_mod_pi():
    assert on_line_mod_pi((PI / 4, 0.0), 4, 1)
    assert on_line_mod_pi((PI / 2, 0.0), 4, 1)
    assert not on_line_mod_pi((PI / 3, 0.0), 4, 1)


def test_line_L_equation():
    for theta in (0.0, PI):
        c = line_L(theta).canonical
        v = (4 * c[:, 0] + c[:, 1] - theta) / (2 * PI)
        assert np.allclose(v, np.round(v), atol=1e-9)


def test_line_L_pi_segments_cut_at_quarter_points():
    segs = line_L_pi_segments()
    assert set(segs) == {"left", "middle", "right"}
    cuts = [(PI / 4, 0.0), (3 * PI / 4, 0.0)]
    for poly in segs.values():
        c = poly.canonical
        assert np.allclose(np.mod(4 * c[:, 0] + c[:, 1] - PI, 2 * PI), 0.0, atol=1e-9) or \
            np.allclose(np.mod(4 * c[:, 0] + c[:, 1] + PI, 2 * PI), 0.0, atol=1e-9)
        assert min(quotient_distance(p, q) for p in c for q in cuts) > 0


def test_crossing_segments():
    c1 = Polyline(np.array([[0.0, 0.0], [1.0, 1.0]]) + 0.5)
    c2 = Polyline(np.array([[0.0, 1.0], [1.0, 0.0]]) + 0.5)
    out = intersect_polylines(c1, c2)
    assert len(out) == 1
    assert out[0].point.as_tuple() == pytest.approx((1.0, 1.0))
    assert out[0].sign in (-1, 1)


def test_disjoint_segments():
    c1 = Polyline(np.array([[0.5, 0.5], [0.6, 0.5]]))
    c2 = Polyline(np.array([[0.5, 1.5], [0.6, 1.5]]))
    assert intersect_polylines(c1, c2) == []


def test_vertical_line_meets_L0_once():
    out = intersect_polylines(vertical(PI / 2), line_L(0.0, 2001))
    pts = [c.point.as_tuple() for c in out]
    # oracle: dense sampling of 4a + b on the vertical line
    b = np.linspace(0, 2 * PI, 200001)
    v = np.mod(4 * PI / 2 + b, 2 * PI)
    hits = b[np.minimum(v, 2 * PI - v) < 1e-4]
    assert np.all(np.minimum(hits, 2 * PI - hits) < 1e-3)
    assert len(pts) == 1
    assert quotient_distance(pts[0], (PI / 2, 0.0)) < 1e-9


def test_intersection_numbers():
    assert abs(intersection_number(vertical(PI / 2), line_L(PI, 2001))) == 1
    small = Polyline.from_points([(1.0, 1.0), (1.2, 1.0), (1.2, 1.2), (1.0, 1.2)], closed=True)
    far = Polyline(np.array([[2.0, 3.0], [2.5, 3.0]]))
    assert intersection_number(small, far) == 0
    through = Polyline(np.array([[0.9, 1.1], [1.3, 1.1]]))
    assert len(intersect_polylines(small, through)) == 2
    assert intersection_number(small, through) == 0


def test_tangency_is_reported():
    c = vertical(1.0)
    with pytest.raises(TangencyUnresolved):
        intersection_number(c, Polyline(np.array([[1.0, 2.0], [1.0, 2.4]])))


def test_complement_components():
    assert components_of_complement([]).n_components == 1
    lab = components_of_complement([vertical(PI / 2)])
    assert lab.n_components == 2
    assert lab.component_of((PI / 4, 1.0)) != lab.component_of((3 * PI / 4, 1.0))
    with pytest.raises(PointOnCurve):
        lab.component_of((PI / 2, 1.0))


def test_complement_resolution_agreement():
    curves = [vertical(PI / 3), vertical(2 * PI / 3)]
    counts = {components_of_complement(curves, resolution=r).n_components for r in (96, 160)}
    assert counts == {3}


def test_lift_windings():
    a = np.linspace(0, PI, 101)
    edge = Polyline(np.stack([a, np.zeros_like(a)], -1))
    assert lift_to_cut_open(edge).winding == pytest.approx(0.0)
    assert abs(lift_to_cut_open(vertical(1.0)).winding) == 1


def test_lift_obstructed():
    bad = Polyline(np.array([[0.3, 1.0], [-0.3, 1.0]]))
    with pytest.raises(LiftObstructed):
        lift_to_cut_open(bad)


def test_involutions_on_polylines():
    c = vertical(PI / 3)
    assert hausdorff([c.transform(SIGMA).transform(SIGMA)], [c]) < 1e-9
    assert hausdorff([c.transform(TAU)], [vertical(2 * PI / 3)]) < 1e-3


def test_csv_roundtrip(tmp_path):
    curves = [vertical(1.0, 21), Polyline(np.array([[0.2, 0.3], [0.4, 0.5], [0.6, 0.9]]))]
    path = tmp_path / "c.csv"
    write_polylines_csv(path, curves)
    back = read_polylines_csv(path)
    assert len(back) == 2
    assert back[0].closed and not back[1].closed
    assert np.allclose(back[1].canonical, curves[1].canonical)
