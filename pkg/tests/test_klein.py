import math

import numpy as np
import pytest

from su2splice.errors import InvalidTarget, NoIntersection
from su2splice.groups import relator_residuals_array
from su2splice.klein import (KLEIN, KleinRepTarget, classified_deviation, classify_by_bruteforce,
                             glue_with_klein_bundle, klein_amalgam, line_L_eps, realize_klein_rep,
                             synthetic_torus_curve, verify_klein_gluing)
from su2splice.pillowcase import Polyline
from su2splice.su2 import IDENTITY, QJ, from_circle
from su2splice.tracing import TracedCurve

PI = math.pi


def test_realize_nonabelian():
    rep = realize_klein_rep(KleinRepTarget(from_circle(PI), from_circle(PI / 3)))
    a, b = rep.values
    assert a.distance(QJ) < 1e-15
    assert b.distance(from_circle(PI / 3)) < 1e-15
    assert not rep.abelian
    assert rep.residual < 1e-12


def test_realize_abelian():
    rep = realize_klein_rep(KleinRepTarget.from_angles(1.1, 0.0))
    a, b = rep.values
    assert a.distance(from_circle(0.55)) < 1e-15
    assert b.distance(IDENTITY) < 1e-15
    assert rep.abelian
    assert (a * a).distance(from_circle(1.1)) < 1e-14


def test_invalid_target():
    with pytest.raises(InvalidTarget):
        KleinRepTarget.from_angles(PI / 3, PI / 5)
    with pytest.raises(InvalidTarget):
        KleinRepTarget(QJ, IDENTITY)


def test_classified_deviation():
    a = np.array([QJ.as_array(), from_circle(0.3).as_array()])
    b = np.array([from_circle(0.7).as_array(), from_circle(PI).as_array()])
    assert np.allclose(classified_deviation(a, b), 0.0, atol=1e-15)
    assert classified_deviation(from_circle(0.3).as_array(), from_circle(0.7).as_array()) > 0.1


@pytest.mark.parametrize("mode", ["generic", "abelian", "sigma"])
def test_bruteforce_small(mode):
    rep = classify_by_bruteforce(samples=20_000, seed=1, mode=mode)
    assert rep.ok
    assert rep.converged > 0.9 * rep.samples
    if mode == "abelian":
        assert rep.n_nonabelian == 0
    if mode == "sigma":
        assert rep.lambda_coverage == 1.0
    if mode == "generic":
        assert rep.n_abelian > 0 and rep.n_nonabelian > 0


def test_bruteforce_rejects_small_sample():
    with pytest.raises(ValueError):
        classify_by_bruteforce(samples=10)


def test_line_L_eps():
    for eps in (1, -1):
        c = line_L_eps(PI, eps).coords
        assert np.allclose(np.mod(c[:, 1] - eps * (c[:, 0] + PI) + PI, 2 * PI) - PI, 0.0, atol=1e-12)


def test_synthetic_curve_glues():
    g, tc = synthetic_torus_curve()
    kg = glue_with_klein_bundle([tc], 1, g)
    assert kg.nonabelian
    assert kg.residual < 1e-8
    assert kg.point.alpha == pytest.approx(PI / 2)
    assert kg.point.beta == pytest.approx(3 * PI / 2)
    check = verify_klein_gluing(kg, g)
    assert check["residual"] < 1e-8 and check["nonabelian_defect"] > 1e-3


@pytest.mark.parametrize("eps", [1, -1])
def test_trefoil_glues(trefoil, trefoil_loops, eps):
    kg = glue_with_klein_bundle(trefoil_loops, eps, trefoil)
    assert kg.nonabelian and kg.residual < 1e-8
    assert relator_residuals_array(kg.group, kg.assignment.as_array()[None]).max() < 1e-8
    # the extended representation sends sigma to -1
    a = kg.assignment.values[trefoil.n_generators]
    assert (a * a).distance(-IDENTITY) < 1e-12
    # the point lies on beta = eps (alpha + pi)
    d = (kg.point.beta - eps * (kg.point.alpha + PI)) / (2 * PI)
    assert abs(d - round(d)) < 1e-6


def test_winding_zero_curve():
    g, tc = synthetic_torus_curve()
    t = np.linspace(0, 2 * PI, 100, endpoint=False)
    loop = Polyline.from_points(np.stack([1.0 + 0.2 * np.cos(t), 3.0 + 0.2 * np.sin(t)], -1), closed=True)
    fake = TracedCurve(loop, tc.witnesses[:1] * len(loop), 0.8, (0.8, 1.2))
    with pytest.raises(NoIntersection, match="winding 0"):
        glue_with_klein_bundle([fake], 1, g)


def test_amalgam_relators(trefoil):
    g = klein_amalgam(trefoil, 1)
    assert g.n_generators == trefoil.n_generators + 2
    assert KLEIN.relators[0] in [tuple(x - trefoil.n_generators if x > 0 else x + trefoil.n_generators
                                       for x in r) for r in g.relators]
