"""Tracing pillowcase images of representation varieties by pseudo-arclength
continuation, plus the closed-curve bookkeeping built on top of the traced
arcs (closing arcs through the abelian line, selecting the curve through
``(pi/4, 0)``)."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .errors import ContinuationStalled, SelectionFailed
from .groups import (
    FPGroup,
    RepAssignment,
    abelian_weights,
    eval_word_array,
    peripheral_images,
    torsion_characters,
)
from .pillowcase import (
    PI,
    TAU,
    TWO_PI,
    Polyline,
    canonical_array,
    images,
    intersect_polylines,
    line_L,
    quotient_distance,
)
from .reps import System, apply_step, gauss_newton_min_norm, gauge_fix, pillow_of, solve_representations
from .su2 import commutator_defect_array, pillow_coords_array

MAX_ARC_LENGTH = 10 * math.pi
DISPLACEMENT_CAP = 0.05
CORRECTOR_TOL = 1e-12
J_MIN = 1e-6  # |j part of generator 2| below which a vertex counts as reducible


@dataclass(frozen=True, eq=False)
class TracedCurve:
    """A traced curve with one witness representation per vertex."""

    curve: Polyline
    witnesses: tuple
    margin_delta: float
    endpoints_alpha: tuple
    abelian: bool = False
    group_name: str = ""
    info: dict = field(default_factory=dict)

    @property
    def coords(self) -> np.ndarray:
        return self.curve.coords

    def max_residual(self) -> float:
        return max((w.residual for w in self.witnesses), default=0.0)

    def write_csv(self, path) -> None:
        write_traced_csv(path, [self])


def _margin(coords: np.ndarray) -> float:
    a = canonical_array(coords)[:, 0]
    return float(min(a.min(), PI - a.max())) if len(a) else 0.0


def make_curve(group: FPGroup, Qs, closed: bool = False, abelian: bool = False, coords=None, **info) -> TracedCurve:
    """Assemble a TracedCurve from per-vertex generator images."""
    Qs = np.asarray(Qs, dtype=float)
    wit = tuple(RepAssignment.from_array(group, q) for q in Qs)
    if coords is None:
        coords = pillow_of(group, Qs)
    poly = Polyline.from_points(coords, closed=closed)
    if len(poly) == len(wit) + 1:
        # from_points repeated the first vertex to close the curve
        wit = wit + wit[:1]
    a = poly.canonical[:, 0]
    ends = (float(a[0]), float(a[-1])) if len(a) else (math.nan, math.nan)
    return TracedCurve(poly, wit, _margin(poly.coords), ends, abelian, group.name, dict(info))


# ---------------------------------------------------------------------------
# abelian locus


def abelian_locus(group: FPGroup, samples: int = 241) -> list:
    """Curves traced by the abelian representations, one per character of
    the torsion of ``H_1`` (knot groups give the single line ``beta = 0``)."""
    chars, free = torsion_characters(group)
    if not free:
        return []
    f = np.array(free[0], dtype=float)
    emu = np.array(group.exponent_sums(group.mu_word), dtype=float)
    pair = abs(float(f @ emu))
    if pair == 0:
        return []
    out = []
    seen = []
    # alpha = pair * t sweeps [0, pi] once
    t = np.linspace(0.0, PI / pair, samples)
    for theta in chars:
        ang = t[:, None] * f[None, :] + np.asarray(theta)[None, :]
        z = np.zeros_like(ang)
        Q = np.stack([np.cos(ang), np.sin(ang), z, z], -1)
        coords = pillow_of(group, Q)
        key = tuple(np.round(coords[[0, len(coords) // 2, -1]], 6).ravel())
        if key in seen:
            continue
        seen.append(key)
        out.append(make_curve(group, Q, abelian=True, coords=coords, kind="abelian"))
    return out


# ---------------------------------------------------------------------------
# continuation


def _tangent(system: System, Q, prev=None):
    _, J = system.residual_and_jacobian(Q[None])
    _, s, vt = np.linalg.svd(J[0])
    t = vt[-1]
    if prev is not None and t @ prev < 0:
        t = -t
    return t


def _jpart(Q) -> float:
    return float(Q[1, 2]) if Q.shape[0] > 1 else 0.0


def _even_extrapolate(s0, v0, s1, v1):
    """Value at ``s = 0`` of ``v = A + B s^2`` through two samples."""
    d = s1 * s1 - s0 * s0
    if abs(d) < 1e-300:
        return 0.5 * (v0 + v1)
    return (v0 * s1 * s1 - v1 * s0 * s0) / d


def _continue(group: FPGroup, system: System, Q0, direction, step: float, max_len: float):
    """Walk one way from ``Q0``.  Returns (list of Q, list of lifted pillowcase
    coords, end kind, endpoint coords or None)."""
    Qs = [Q0]
    pts = [pillow_of(group, Q0[None])[0]]
    lifted = [pts[0].copy()]
    t_prev = _tangent(system, Q0)
    if direction < 0:
        t_prev = -t_prev
    h = step
    h_min = step * 1e-4
    length = 0.0
    s_sign = np.sign(_jpart(Q0))
    while True:
        Q = Qs[-1]
        t = _tangent(system, Q, t_prev)
        accepted = False
        while h >= h_min:
            pred = (t * h).reshape(-1, 3)
            Qp = apply_step(Q[None], pred.ravel()[None])[0]
            Qc, res = gauss_newton_min_norm(system, Qp, tol=CORRECTOR_TOL, max_iter=12,
                                           rank=3 * system.n - 1)
            if not (res < 1e-11 and np.all(np.isfinite(Qc))):
                h *= 0.5
                continue
            p = pillow_of(group, Qc[None])[0]
            disp = quotient_distance(lifted[-1], p)
            jn = _jpart(Qc)
            t_new = _tangent(system, Qc, t)
            if disp > min(DISPLACEMENT_CAP, 2.5 * step) or t_new @ t < 0.8 or abs(jn) < J_MIN:
                h *= 0.5
                continue
            accepted = True
            break
        if not accepted:
            # stalled next to a reducible point: close with the even fit of the last two vertices
            if len(Qs) >= 2 and abs(_jpart(Qs[-1])) < 1e-2:
                s0, s1 = _jpart(Qs[-2]), _jpart(Qs[-1])
                end = np.array([_even_extrapolate(s0, lifted[-2][k], s1, lifted[-1][k]) for k in range(2)])
                return Qs, lifted, "reducible", end
            raise ContinuationStalled(
                f"step fell below {h_min:.2e} after {len(Qs)} vertices", partial=(Qs, lifted)
            )
        # lift the new pillowcase point next to the previous one
        cand = images(p[None])
        nxt = cand[np.argmin(np.linalg.norm(cand - lifted[-1], axis=1))]
        jn = _jpart(Qc)
        if np.sign(jn) != s_sign:
            s0 = _jpart(Q)
            end = np.array([_even_extrapolate(s0, lifted[-1][k], jn, nxt[k]) for k in range(2)])
            return Qs, lifted, "reducible", end
        length += disp
        Qs.append(Qc)
        lifted.append(nxt)
        t_prev = t_new
        # loop closure: back at the start in group coordinates
        if length > 4 * step and np.linalg.norm(Qc - Q0) < 0.6 * np.linalg.norm(Qs[1] - Q0) + 1e-12:
            return Qs, lifted, "closed", None
        if length > max_len:
            return Qs, lifted, "length", None
        h = float(np.clip(h * step / max(disp, 1e-12), 0.5 * h, 2.0 * h))


def _abelian_at(group: FPGroup, alpha: float, beta: float = 0.0):
    """Abelian witness with ``rho(mu) = e^{i alpha}`` (used at arc ends)."""
    try:
        w = np.array([float(x) for x in abelian_weights(group)])
    except Exception:  # noqa: BLE001 - groups without free quotient have no abelian ends
        return None
    ang = alpha * w
    z = np.zeros_like(ang)
    return np.stack([np.cos(ang), np.sin(ang), z, z], -1)


def trace_from(group: FPGroup, Q0, step: float = 0.01, max_len: float = MAX_ARC_LENGTH) -> TracedCurve:
    """Trace the irreducible component through one solution in both directions."""
    system = System.for_group(group)
    Q0 = np.asarray(Q0, dtype=float)
    fw = _continue(group, system, Q0, +1, step, max_len)
    if fw[2] == "closed":
        Qs, lifted = fw[0], fw[1]
        Qs = Qs + [Qs[0]]
        pts = canonical_array(np.array(lifted))
        pts = np.vstack([pts, pts[:1]])
        tc = make_curve(group, np.array(Qs), closed=True, coords=pts, kind="irreducible", end_kinds=("closed",))
        return tc
    bw = _continue(group, system, Q0, -1, step, max_len - 0 * step)
    Qs = list(reversed(bw[0][1:])) + fw[0]
    pts = list(reversed(bw[1][1:])) + fw[1]
    wit_Q = list(Qs)
    coords = list(pts)
    ends = []
    for kind, end, where in ((bw[2], bw[3], 0), (fw[2], fw[3], -1)):
        ends.append(kind)
        if end is None:
            continue
        ab = _abelian_at(group, end[0], end[1])
        if ab is None:
            continue
        if where == 0:
            coords.insert(0, end)
            wit_Q.insert(0, ab)
        else:
            coords.append(end)
            wit_Q.append(ab)
    tc = make_curve(group, np.array(wit_Q), closed=False, coords=canonical_array(np.array(coords)),
                    kind="irreducible", end_kinds=tuple(ends))
    # the margin concerns the irreducible vertices only
    irr = [k for k, w in enumerate(tc.witnesses) if not w.abelian]
    marg = _margin(tc.coords[irr]) if irr else 0.0
    return replace(tc, margin_delta=marg)


def trace_pillowcase_image(group: FPGroup, step: float = 0.01, grid: int = 10, seed: int = 0,
                           include_abelian: bool = True) -> list:
    """Irreducible arcs (and the abelian locus) of the pillowcase image."""
    if not group.has_peripheral:
        raise ValueError("group has no peripheral words")
    sols = solve_representations(group, grid=grid, seed=seed)
    irr = [s for s in sols if not s.abelian and abs(s.values[1].y if len(s.values) > 1 else 0) > 1e-3]
    curves = []
    covered = None
    for s in irr:
        Q = s.as_array()
        if covered is not None and covered[0].query(Q.ravel())[0] < covered[1]:
            continue
        tc = trace_from(group, Q, step=step)
        curves.append(tc)
        allQ = np.array([w.as_array() for w in tc.witnesses])
        # traced vertices lie on the j >= 0 side, matching gauge-fixed seeds
        allQ = gauge_fix(allQ).reshape(len(allQ), -1)
        prev = covered[2] if covered is not None else np.zeros((0, allQ.shape[1]))
        pool = np.vstack([prev, allQ])
        spacing = np.linalg.norm(np.diff(allQ, axis=0), axis=1)
        rad = 3 * float(spacing.max()) if len(spacing) else 0.1
        rad = max(rad, covered[1] if covered is not None else 0.0)
        covered = (cKDTree(pool), rad, pool)
    if include_abelian:
        curves.extend(abelian_locus(group))
    return curves


# ---------------------------------------------------------------------------
# tau and closed curves


def tau_curve(tc: TracedCurve, group: FPGroup) -> TracedCurve:
    """Image under ``tau``: witnesses multiplied by the central character
    ``g -> (-1)^{w(g)}`` where ``w`` is the abelianization weight."""
    w = abelian_weights(group)
    if any(x.denominator != 1 for x in w):
        raise ValueError("tau needs integral abelian weights")
    signs = np.array([(-1.0) ** int(x) for x in w])
    Qs = np.array([wi.as_array() for wi in tc.witnesses]) * signs[None, :, None]
    wit = tuple(RepAssignment.from_array(group, q) for q in Qs)
    curve = tc.curve.transform(TAU)
    a = curve.canonical[:, 0]
    return TracedCurve(curve, wit, tc.margin_delta, (float(a[0]), float(a[-1])), tc.abelian, tc.group_name,
                       dict(tc.info, tau=True))


def _beta_zero_crossings(coords: np.ndarray, tol: float = 1e-6) -> list:
    """Positions ``(k, t)`` along a lifted polyline where ``beta = 0 mod 2pi``."""
    out = []
    b = coords[:, 1] / TWO_PI
    for k in range(len(coords) - 1):
        lo, hi = sorted((b[k], b[k + 1]))
        n0 = math.ceil(lo - tol)
        n1 = math.floor(hi + tol)
        for n in range(n0, n1 + 1):
            if b[k + 1] == b[k]:
                t = 0.0
            else:
                t = (n - b[k]) / (b[k + 1] - b[k])
            t = min(max(t, 0.0), 1.0)
            if k < len(coords) - 2 and t >= 1.0 - 1e-12:
                continue
            out.append((k, t))
    return out


def closed_loops(group: FPGroup, curves: list) -> list:
    """Closed curves made of a piece of an irreducible arc between two
    consecutive visits to ``beta = 0`` and the abelian segment joining them."""
    loops = []
    for tc in curves:
        if tc.abelian:
            continue
        if tc.curve.closed:
            loops.append(tc)
            continue
        X = tc.curve.coords
        hits = _beta_zero_crossings(X)
        # always include the ends when they sit on beta = 0
        for (k0, t0), (k1, t1) in zip(hits[:-1], hits[1:]):
            P0 = X[k0] + t0 * (X[k0 + 1] - X[k0])
            P1 = X[k1] + t1 * (X[k1 + 1] - X[k1])
            mid = X[k0 + 1: k1 + 1]
            arc_pts = np.vstack([P0[None], mid, P1[None]])
            arc_Q = [tc.witnesses[min(k0 + int(t0 > 0.5), len(X) - 1)].as_array()]
            arc_Q += [w.as_array() for w in tc.witnesses[k0 + 1: k1 + 1]]
            arc_Q += [tc.witnesses[min(k1 + int(t1 > 0.5), len(X) - 1)].as_array()]
            if len(arc_pts) < 3:
                continue
            a0 = canonical_array(P0)[0, 0]
            a1 = canonical_array(P1)[0, 0]
            n = max(2, int(math.ceil(abs(a1 - a0) / 0.01)) + 1)
            ret_a = np.linspace(a1, a0, n)[1:]
            ret_pts = np.stack([ret_a, np.zeros_like(ret_a)], -1)
            ret_Q = [_abelian_at(group, a) for a in ret_a]
            if any(q is None for q in ret_Q):
                continue
            # snap the junction points onto beta = 0 exactly
            pts = canonical_array(np.vstack([arc_pts, ret_pts]))
            pts[0, 1] = 0.0
            pts[len(arc_pts) - 1, 1] = 0.0
            Qs = np.array(arc_Q + ret_Q)
            loop = make_curve(group, Qs, closed=True, coords=pts, kind="loop", alpha_range=(a0, a1))
            loops.append(replace(loop, margin_delta=min(a0, a1, PI - a0, PI - a1)))
    return loops


def distance_to_polyline(p, curve: Polyline) -> float:
    """Exact quotient distance from a point to a polyline (segment-based)."""
    X = curve.coords
    if len(X) == 0:
        return math.inf
    P = images(canonical_array(p))
    A = X[:-1] if len(X) > 1 else X
    D = (X[1:] - X[:-1]) if len(X) > 1 else np.zeros_like(X)
    best = math.inf
    for q in P:
        # shift the query to each segment's neighbourhood on the torus
        dq = q[None] - A
        dq -= TWO_PI * np.round(dq / TWO_PI)
        dd = np.einsum("ij,ij->i", D, D)
        t = np.clip(np.einsum("ij,ij->i", dq, D) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
        d = np.linalg.norm(dq - t[:, None] * D, axis=1)
        best = min(best, float(d.min()))
    return best


LINE_HIT_TOL = 1e-3


def line_margin(curves: list, r: int, s: int) -> float:
    """Smallest ``|r a + s b mod pi|`` (distance to ``pi Z``) over the
    irreducible vertices of ``curves``; ``inf`` when there are none."""
    best = math.inf
    for tc in curves:
        if tc.abelian:
            continue
        c = tc.curve.canonical
        keep = np.array([not w.abelian for w in tc.witnesses], dtype=bool) if tc.witnesses else np.ones(len(c), bool)
        if not keep.any():
            continue
        v = np.mod(r * c[keep, 0] + s * c[keep, 1], PI)
        best = min(best, float(np.minimum(v, PI - v).min()))
    return best


def line_hits(curve: Polyline, n: int = 4) -> list:
    """Points where a curve meets ``{n a + b in pi Z}``."""
    out = []
    for theta in (0.0, PI):
        for c in intersect_polylines(curve, line_L(theta, 2001, n=n)):
            out.append(c.point)
    return out


def select_gamma(curves: list, group: FPGroup | None = None, tol: float = 1e-6) -> TracedCurve:
    """Closed curve through ``(pi/4, 0)`` meeting ``{4a + b in pi Z}`` only at
    ``(pi/4, 0)`` and possibly ``(pi/2, 0)``; a curve through ``(3pi/4, 0)``
    is replaced by its ``tau`` image."""
    q1, q3, half = (PI / 4, 0.0), (3 * PI / 4, 0.0), (PI / 2, 0.0)
    reasons = []
    for tc in curves:
        if not tc.curve.closed:
            continue
        h1 = distance_to_polyline(q1, tc.curve) < tol
        h3 = distance_to_polyline(q3, tc.curve) < tol
        if h1 and h3:
            reasons.append("curve passes through both (pi/4,0) and (3pi/4,0)")
            continue
        if not (h1 or h3):
            reasons.append("curve misses (pi/4,0) and (3pi/4,0)")
            continue
        cand = tc
        if h3:
            if group is None:
                cand = TracedCurve(tc.curve.transform(TAU), (), tc.margin_delta, tc.endpoints_alpha, tc.abelian,
                                   tc.group_name, dict(tc.info, tau=True))
            else:
                cand = tau_curve(tc, group)
        bad = [p for p in line_hits(cand.curve)
               if min(quotient_distance(p.as_tuple(), q1), quotient_distance(p.as_tuple(), half)) > LINE_HIT_TOL]
        if bad:
            reasons.append(f"curve meets 4a+b in piZ at ({bad[0].alpha:.4f},{bad[0].beta:.4f})")
            continue
        return cand
    raise SelectionFailed("; ".join(reasons) if reasons else "no closed curve offered")


# ---------------------------------------------------------------------------
# CSV


def write_traced_csv(path, curves: list) -> None:
    """Columns ``curve, alpha, beta, residual, abelian``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["curve", "alpha", "beta", "residual", "abelian"])
        for k, tc in enumerate(curves):
            for (a, b), wit in zip(tc.curve.canonical, tc.witnesses):
                w.writerow([k, repr(float(a)), repr(float(b)), f"{wit.residual:.3e}", int(wit.abelian)])


def verify_witnesses(group: FPGroup, tc: TracedCurve, point_tol: float = 1e-6) -> dict:
    """Re-check every vertex from raw quaternion products."""
    Q = np.array([w.as_array() for w in tc.witnesses])
    one = np.array([1.0, 0, 0, 0])
    res = np.zeros(len(Q))
    for r in group.relators:
        res = np.maximum(res, np.linalg.norm(eval_word_array(r, Q) - one, axis=-1))
    m, l = peripheral_images(group, Q)
    a, b = pillow_coords_array(m, l)
    pts = np.stack([a, b], -1)
    dev = np.array([quotient_distance(p, q) for p, q in zip(pts, tc.curve.canonical)])
    defect = np.zeros(len(Q))
    for i in range(Q.shape[1]):
        for j in range(i + 1, Q.shape[1]):
            defect = np.maximum(defect, commutator_defect_array(Q[:, i], Q[:, j]))
    return {"max_residual": float(res.max()), "max_point_deviation": float(dev.max()),
            "min_defect_off_axis": float(defect[np.abs(np.sin(pts[:, 1])) > 1e-3].min()) if np.any(
                np.abs(np.sin(pts[:, 1])) > 1e-3) else math.inf}
