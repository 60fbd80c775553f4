import math

import numpy as np
import pytest

from oracles import FORBIDDEN_POINTS, grid_intersections, match_sets, quotient_gap, sigma_coords
from su2splice.catalog import peripheral_homology
from su2splice.errors import InvalidParameters, MatchingFailed
from su2splice.groups import abelian_representations
from su2splice.homology import NORMAL_FORM, GluingMatrix, splice_homology
from su2splice.klein import KLEIN, synthetic_torus_curve
from su2splice.pillowcase import Polyline
from su2splice.splice import (FORBIDDEN, GluedCertificate, NoneFound, SearchResult, SpliceProblem,
                              build_glued_representation, intersect_images, n_threads, normalized_problem,
                              search_nonabelian, verify_certificate)
from su2splice.tracing import TracedCurve

PI = math.pi


def vertical(alpha, n=200):
    b = np.linspace(0, 2 * PI, n, endpoint=False)
    return TracedCurve(Polyline.from_points(np.stack([np.full_like(b, alpha), b], -1), closed=True), (),
                       min(alpha, PI - alpha), (alpha, alpha))


@pytest.fixture(scope="module")
def trefoil_search(trefoil):
    return search_nonabelian(SpliceProblem(trefoil, trefoil))


def test_forbidden_constant():
    assert FORBIDDEN == FORBIDDEN_POINTS


def test_edge_segments_give_nothing():
    a = np.linspace(0, PI, 101)
    edge = Polyline(np.stack([a, 0 * a], -1))
    res = intersect_images(edge, edge)
    assert len(res) == 0
    removed = sorted(p.point.alpha for p in res.removed)
    assert removed == pytest.approx([0.0, PI / 2, PI])


def test_vertical_self_overlap_is_nonempty():
    # sigma fixes every vertical circle, so the curves overlap
    res = intersect_images(vertical(PI / 3), vertical(PI / 3))
    assert len(res) > 0
    assert all(abs(p.point.alpha - PI / 3) < 1e-9 for p in res.points)


def test_trefoil_intersections_match_grid_oracle(trefoil_loops):
    c = trefoil_loops[0]
    res = intersect_images(c, c)
    assert len(res) > 0
    clusters = grid_intersections(c.curve.coords, sigma_coords(c.curve.coords))
    worst, ok = match_sets([p.as_tuple() for p in res], clusters, 0.02, FORBIDDEN)
    assert ok, worst


def test_transversality_report(trefoil_loops):
    c = trefoil_loops[0]
    res = intersect_images(c, c)
    rep = res.transversality
    assert rep is not None and rep["both_through_half"]
    assert rep["transverse"] and rep["second_point_found"]


def test_problem_requires_normal_form(trefoil):
    with pytest.raises(InvalidParameters):
        SpliceProblem(trefoil, trefoil, GluingMatrix(3, 1, 4, 1))
    with pytest.raises(InvalidParameters):
        SpliceProblem(trefoil, trefoil, epsilon=2)
    assert SpliceProblem(trefoil, KLEIN, GluingMatrix(1, 0, -1, -1)).klein


def test_normalized_problem_keeps_homology(trefoil):
    g = GluingMatrix(3, 1, 4, 1)
    problem, norm = normalized_problem(trefoil, trefoil, g)
    assert problem.gluing == NORMAL_FORM
    before = splice_homology(g, peripheral_homology(trefoil), peripheral_homology(trefoil))
    after = splice_homology(NORMAL_FORM, peripheral_homology(problem.side1), peripheral_homology(problem.side2))
    assert before == after == [4]


def test_amalgam_shape(trefoil):
    g = SpliceProblem(trefoil, trefoil).amalgam()
    assert g.n_generators == 4
    assert len(g.relators) == 4


def test_abelian_gluing_is_not_positive(trefoil):
    w = abelian_representations(trefoil, PI / 2)
    cert = build_glued_representation(SpliceProblem(trefoil, trefoil), (PI / 2, 0.0), w, w)
    assert cert.residual < 1e-8
    assert cert.nonabelian_defect < 1e-6
    assert not cert.positive


def test_mismatched_witnesses(trefoil):
    w1 = abelian_representations(trefoil, 0.4)
    w2 = abelian_representations(trefoil, 1.9)
    with pytest.raises(MatchingFailed):
        build_glued_representation(SpliceProblem(trefoil, trefoil), (0.4, 0.0), w1, w2)


def test_trefoil_search(trefoil_search):
    res = trefoil_search
    assert isinstance(res, SearchResult)
    cert = res.certificate
    assert isinstance(cert, GluedCertificate) and cert.positive
    assert cert.residual < 1e-8 and cert.nonabelian_defect > 1e-3
    check = verify_certificate(cert)
    assert check["ok"] and check["residual"] < 1e-8 and not check["forbidden_point"]
    assert all(quotient_gap(cert.point.as_tuple(), f) > 1e-3 for f in FORBIDDEN)
    assert res.to_json()["found"]


def test_certificate_point_is_sigma_compatible(trefoil, trefoil_search):
    from su2splice.groups import eval_word
    from su2splice.su2 import simultaneous_diagonalize

    cert = trefoil_search.certificate
    vals = list(cert.assignment.values)
    n1 = cert.n_side1
    side2 = vals[n1:]
    m2, l2 = eval_word(trefoil.mu_word, side2), eval_word(trefoil.lambda_word, side2)
    p2 = simultaneous_diagonalize(m2, l2, tol=1e-7).point
    p1 = simultaneous_diagonalize(eval_word(trefoil.mu_word, vals[:n1]),
                                  eval_word(trefoil.lambda_word, vals[:n1]), tol=1e-7).point
    sig = (p2[0], 2 * PI - 4 * p2[0] - p2[1])
    assert quotient_gap(p1, sig) < 1e-6


def test_none_found_diagnostic():
    g, _ = synthetic_torus_curve()
    problem = SpliceProblem(g, g)
    res = search_nonabelian(problem, side_curves=((vertical(PI / 3), vertical(2 * PI / 3)),
                                                  (vertical(PI / 2), vertical(PI / 2))))
    assert isinstance(res, NoneFound)
    d = res.diagnostic
    assert d["distinct"] and d["n_components"] == 3
    assert res.to_json()["found"] is False


def test_klein_side_delegates(trefoil):
    res = search_nonabelian(SpliceProblem(trefoil, KLEIN, GluingMatrix(1, 0, -1, -1), step=0.02))
    assert res.pair == "klein"
    assert res.certificate.positive
    assert verify_certificate(res.certificate)["ok"]


def test_thread_count(monkeypatch):
    monkeypatch.setenv("SU2SPLICE_THREADS", "3")
    assert n_threads() == 3
    monkeypatch.delenv("SU2SPLICE_THREADS")
    assert n_threads() >= 1
