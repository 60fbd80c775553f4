import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from su2splice.errors import SelectionFailed
from su2splice.groups import (FPGroup, RepAssignment, abelian_representations, alexander_eval, eval_word,
                              fox_alexander, klein_group, relator_residuals_array)
from su2splice.pillowcase import TAU, Polyline, hausdorff, lift_to_cut_open
from su2splice.reps import (Equation, System, apply_step, gauss_newton_min_norm, left_matrix,
                            right_matrix, solve_representations)
from su2splice.su2 import IDENTITY, QJ, from_circle, qmul, random_su2
from su2splice.tracing import (TracedCurve, select_gamma, tau_curve, trace_pillowcase_image, verify_witnesses,
                               write_traced_csv)

PI = math.pi


def test_eval_word_examples():
    g = klein_group()
    a = RepAssignment(g.generators, (QJ, from_circle(PI / 3)), 0.0, False)
    assert eval_word((), a).distance(IDENTITY) < 1e-15
    assert eval_word((1, -1), a).distance(IDENTITY) < 1e-15
    assert eval_word(g.relators[0], a).distance(IDENTITY) < 1e-15


def test_abelian_representation_at_zero(trefoil):
    rep = abelian_representations(trefoil, 0.0)
    assert all(v.distance(IDENTITY) < 1e-15 for v in rep.values)
    rep = abelian_representations(trefoil, 0.9)
    assert relator_residuals_array(trefoil, rep.as_array()[None]).max() < 1e-12


def test_alexander_examples(trefoil):
    assert abs(alexander_eval(trefoil, PI / 6)) < 1e-12
    assert alexander_eval(trefoil, PI / 2) == pytest.approx(-3.0)
    unknot = FPGroup(("x",), (), (1,), (), (1,), "unknot")
    assert alexander_eval(unknot, 0.7) == pytest.approx(1.0)
    assert fox_alexander(trefoil) in ((1, -1, 1), (-1, 1, -1))


def test_jacobian_against_finite_differences(trefoil):
    sysm = System.for_group(trefoil, [Equation(trefoil.mu_word, (0.0, 1.0, 0.0, 0.0))])
    rng = np.random.default_rng(0)
    Q = random_su2(rng, (3, 2))
    F, J = sysm.residual_and_jacobian(Q)
    assert np.allclose(F, sysm.residual(Q), atol=1e-13)
    h = 1e-6
    for b in range(3):
        for c in range(6):
            d = np.zeros((3, 6))
            d[:, c] = h
            fd = (sysm.residual(apply_step(Q, d)) - sysm.residual(apply_step(Q, -d))) / (2 * h)
            assert np.allclose(fd[b], J[b, :, c], atol=1e-7)
    F1, J1 = sysm.residual_and_jacobian(Q[:1])
    assert np.allclose(J1[0], J[0], atol=1e-13)


def test_jacobian_against_matrix_products():
    # the single relator x y x^-1: column i of the x block is L(x e_i) R(y x^-1) ... built from 4x4 matrices
    sysm = System(2, [Equation((1, 2, -1))], gauge=False)
    rng = np.random.default_rng(4)
    x, y = random_su2(rng, 2)
    _, J = sysm.residual_and_jacobian(np.array([[x, y]]))
    units = np.eye(4)[1:]
    xinv = x * np.array([1, -1, -1, -1])
    tail = qmul(y, xinv)
    for i in range(3):
        first = left_matrix(qmul(x, units[i])) @ tail
        last = -(right_matrix(qmul(units[i], xinv)) @ qmul(x, y))
        assert np.allclose(J[0, :4, i], first + last, atol=1e-12)
        mid = left_matrix(x) @ right_matrix(xinv) @ qmul(y, units[i])
        assert np.allclose(J[0, :4, 3 + i], mid, atol=1e-12)


def test_rank_truncated_corrector(trefoil):
    sols = [s for s in solve_representations(trefoil, grid=8) if not s.abelian]
    Q = sols[0].as_array()[None]
    kick = apply_step(Q, 1e-3 * np.random.default_rng(2).standard_normal((1, 6)))
    sysm = System.for_group(trefoil)
    out, res = gauss_newton_min_norm(sysm, kick[0], tol=1e-13, max_iter=20, rank=5)
    assert res < 1e-12
    assert relator_residuals_array(trefoil, out[None]).max() < 1e-12


def test_klein_solutions_are_classified():
    g = klein_group()
    sols = solve_representations(g, grid=8)
    assert sols
    seen = set()
    for s in sols:
        a, b = s.values
        sig, lam = a * a, b
        on_pm = min(lam.distance(IDENTITY), lam.distance(-IDENTITY)) < 1e-7
        neg = sig.distance(-IDENTITY) < 1e-7
        assert on_pm or neg
        seen.add("abelian" if on_pm and not neg else "nonabelian")
    assert seen == {"abelian", "nonabelian"}


def test_trivial_group_has_only_trivial_rep():
    g = FPGroup(("x",), ((1,),), (1,), (), (1,), "trivial")
    sols = solve_representations(g, grid=6)
    assert sols and all(s.values[0].distance(IDENTITY) < 1e-8 for s in sols)


def trefoil_irreducible_range(n=361):
    """Grid oracle on the Wirtinger presentation aba = bab: a = e^{it} and b is
    e^{it} conjugated so its axis makes angle phi with the i axis.  Returns the
    t-range where some phi >= 0.05 solves the relation."""
    t = np.linspace(0.01, PI - 0.01, n)
    phi = np.linspace(0.05, PI, 1201)

    def resid(tt, ph):
        x = np.array([np.cos(tt), np.sin(tt), 0.0, 0.0])
        y = np.stack(np.broadcast_arrays(np.cos(tt), np.sin(tt) * np.cos(ph), 0 * ph, -np.sin(tt) * np.sin(ph)), -1)
        xs = np.broadcast_to(x, y.shape)
        return np.linalg.norm(qmul(qmul(xs, y), xs) - qmul(qmul(y, xs), y), axis=-1)

    hit = []
    for tt in t:
        r = resid(tt, phi)
        k = int(np.argmin(r))
        lo, hi = phi[max(k - 1, 0)], phi[min(k + 1, len(phi) - 1)]
        best = minimize_scalar(lambda p: float(resid(tt, np.array([p]))[0]), bounds=(lo, hi),
                               method="bounded", options={"xatol": 1e-12})
        if best.fun < 1e-7:
            hit.append(tt)
    return min(hit), max(hit)


def test_trefoil_trace_matches_oracle(trefoil_curves):
    irr = [c for c in trefoil_curves if not c.abelian]
    ab = [c for c in trefoil_curves if c.abelian]
    assert len(irr) == 1 and len(ab) == 1
    lo, hi = trefoil_irreducible_range()
    ends = sorted(irr[0].endpoints_alpha)
    assert abs(ends[0] - lo) < 0.02 and abs(ends[1] - hi) < 0.02
    assert ends == pytest.approx([PI / 6, 5 * PI / 6], abs=1e-4)
    assert irr[0].max_residual() < 1e-9


def test_witnesses_verify(trefoil, trefoil_curves):
    report = verify_witnesses(trefoil, trefoil_curves[0])
    assert report["max_residual"] < 1e-9
    assert report["max_point_deviation"] < 1e-6
    assert report["min_defect_off_axis"] > 0


def test_trefoil_loop_winding(trefoil_loops):
    assert trefoil_loops
    assert all(abs(lift_to_cut_open(tc.curve).winding) == 1 for tc in trefoil_loops)


def test_figure_eight_tau_symmetric(entries):
    g = entries["figure_eight"].group
    curves = [c for c in trace_pillowcase_image(g, step=0.02, grid=8) if not c.abelian]
    assert curves
    polys = [c.curve for c in curves]
    assert hausdorff([p.transform(TAU) for p in polys], polys) < 0.04
    tc = tau_curve(curves[0], g)
    assert max(w.residual for w in tc.witnesses) < 1e-9


def synthetic(points, closed=True):
    poly = Polyline.from_points(points, closed=closed)
    return TracedCurve(poly, (), 0.1, (0.0, 0.0))


def tangent_circle(alpha0, r=0.1, n=400):
    """Circle touching the line 4a + b = const at (alpha0, 0) from one side."""
    normal = np.array([4.0, 1.0]) / math.sqrt(17.0)
    centre = np.array([alpha0, 0.0]) + r * normal
    t = np.linspace(0, 2 * PI, n, endpoint=False)
    start = math.atan2(-normal[1], -normal[0])
    return synthetic(centre + r * np.stack([np.cos(start + t), np.sin(start + t)], -1))


def test_select_gamma_through_quarter_point():
    c = tangent_circle(PI / 4)
    assert select_gamma([c]) is c


def test_select_gamma_uses_tau_image():
    chosen = select_gamma([tangent_circle(3 * PI / 4)])
    assert chosen.info.get("tau")
    assert min(np.hypot(*(chosen.curve.canonical - [PI / 4, 0.0]).T)) < 1e-9


def test_select_gamma_rejects_both():
    both = synthetic([(PI / 4, 0.0), (PI / 2, 0.3), (3 * PI / 4, 0.0), (PI / 2, -0.3)])
    with pytest.raises(SelectionFailed, match="both"):
        select_gamma([both])


def test_traced_csv(tmp_path, trefoil_curves):
    path = tmp_path / "t.csv"
    write_traced_csv(path, trefoil_curves)
    head = path.read_text().splitlines()[0]
    assert head == "curve,alpha,beta,residual,abelian"
