"""Splicing two knot exteriors along the order-4 gluing

    mu_1 ~ mu_2,    lambda_1^-1 ~ mu_2^4 lambda_2

and certifying non-abelian SU(2) representations of the result.  In
pillowcase coordinates the gluing matches ``(a, b)`` on side 1 with
``sigma(a, b) = (a, 2pi - 4a - b)`` on side 2, so candidate points are
``c1 & sigma(c2)``; everything except the three points where both sides are
forced abelian yields a certificate.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameters, MatchingFailed, NonCommutingPair, PointOnCurve, SelectionFailed
from .groups import (
    FPGroup,
    RepAssignment,
    amalgamate,
    eval_word,
    eval_word_array,
    inverse_word,
    power_word,
    reduce_word,
)
from .homology import NORMAL_FORM, GluingMatrix, Move, normalize_order4_gluing
from .klein import KLEIN, glue_with_klein_bundle
from .pillowcase import (
    PI,
    SIGMA,
    PillowPoint,
    Polyline,
    components_of_complement,
    intersect_polylines,
    quotient_distance,
)
from .reps import System, gauge_fix, levenberg_marquardt
from .su2 import QJ, UnitQuaternion, commutator_defect_array, qinv, qmul, simultaneous_diagonalize
from .tracing import (
    TracedCurve,
    closed_loops,
    distance_to_polyline,
    select_gamma,
    tau_curve,
    trace_pillowcase_image,
)

FORBIDDEN = ((0.0, 0.0), (PI / 2, 0.0), (PI, 0.0))
FORBIDDEN_TOL = 1e-6
HALF = (PI / 2, 0.0)
MATCH_TOL = 1e-10
CERT_TOL = 1e-8
DEFECT_MIN = 1e-6


def n_threads() -> int:
    """Worker count from ``SU2SPLICE_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("SU2SPLICE_THREADS", "1")))
    except ValueError:
        return 1


def is_klein_group(g: FPGroup) -> bool:
    return (g.n_generators == 2 and g.relators == KLEIN.relators and g.mu_word == KLEIN.mu_word
            and g.lambda_word == KLEIN.lambda_word)


@dataclass(frozen=True)
class SpliceProblem:
    side1: FPGroup
    side2: FPGroup
    gluing: GluingMatrix = NORMAL_FORM
    epsilon: int = 1
    step: float = 0.01
    grid: int = 10
    seed: int = 0

    def __post_init__(self):
        for g in (self.side1, self.side2):
            if not g.has_peripheral:
                raise InvalidParameters(f"group {g.name!r} has no peripheral words")
        if not self.klein and self.gluing != NORMAL_FORM:
            raise InvalidParameters(f"gluing {self.gluing} is not the normal form {NORMAL_FORM}; normalize it first")
        if self.epsilon not in (1, -1):
            raise InvalidParameters("epsilon must be +1 or -1")

    @property
    def klein(self) -> bool:
        return is_klein_group(self.side2)

    def matching_words(self):
        """``(w1, w2)`` with ``mu_1 = mu_2^a lambda_2^b`` and
        ``lambda_1 = mu_2^c lambda_2^d``."""
        a, b, c, d = self.gluing.entries
        g1, g2 = self.side1, self.side2
        w_mu = reduce_word(power_word(g2.mu_word, a) + power_word(g2.lambda_word, b))
        w_lam = reduce_word(power_word(g2.mu_word, c) + power_word(g2.lambda_word, d))
        return [(g1.mu_word, w_mu), (g1.lambda_word, w_lam)]

    def amalgam(self) -> FPGroup:
        return amalgamate(self.side1, self.side2, self.matching_words())


def apply_move_to_groups(move: Move, g1: FPGroup, g2: FPGroup):
    """Peripheral words after a normalization move; the groups themselves
    (and hence the glued manifold's fundamental group) are unchanged."""

    def with_words(g, mu, lam):
        return FPGroup(g.generators, g.relators, reduce_word(mu), reduce_word(lam), g.alexander_coeffs, g.name)

    if move.kind == "twist1":
        return with_words(g1, g1.mu_word + power_word(g1.lambda_word, move.param), g1.lambda_word), g2
    if move.kind == "twist2":
        return g1, with_words(g2, g2.mu_word + power_word(g2.lambda_word, move.param), g2.lambda_word)
    if move.kind == "reverse2":
        return g1, with_words(g2, inverse_word(g2.mu_word), inverse_word(g2.lambda_word))
    if move.kind == "reverse_both":
        return (with_words(g1, g1.mu_word, inverse_word(g1.lambda_word)),
                with_words(g2, g2.mu_word, inverse_word(g2.lambda_word)))
    raise ValueError(f"unknown move {move.kind!r}")


def normalized_problem(side1: FPGroup, side2: FPGroup, gluing: GluingMatrix, **kw):
    """``(SpliceProblem, NormalizationResult)`` for an arbitrary order-4
    gluing, with the peripheral words rewritten by the normalization moves."""
    norm = normalize_order4_gluing(gluing)
    if norm.n != 4:
        raise InvalidParameters(f"gluing has |c| = {norm.n}; the splice engine handles |c| = 4")
    g1, g2 = side1, side2
    for mv in norm.moves:
        g1, g2 = apply_move_to_groups(mv, g1, g2)
    return SpliceProblem(g1, g2, norm.normal, **kw), norm


# ---------------------------------------------------------------------------
# intersections


@dataclass(frozen=True)
class ImagePoint:
    """A point of ``c1 & sigma(c2)`` with its positions on both curves."""

    point: PillowPoint
    seg1: int
    t1: float
    seg2: int
    t2: float
    angle: float


@dataclass(frozen=True)
class IntersectionResult:
    points: tuple
    crossings: tuple
    removed: tuple
    transversality: dict | None = None

    def __iter__(self):
        return iter(p.point for p in self.points)

    def __len__(self):
        return len(self.points)


def _forbidden(p: PillowPoint) -> bool:
    return any(quotient_distance(p.as_tuple(), f) < FORBIDDEN_TOL for f in FORBIDDEN)


def intersect_images(c1, c2, near: float = 1e-3) -> IntersectionResult:
    """Points of ``c1 & sigma(c2)`` other than ``(0,0)``, ``(pi/2,0)`` and
    ``(pi,0)``.  When both curves pass through ``(pi/2, 0)`` the result
    reports the crossing angle there and whether another point exists."""
    p1 = c1.curve if isinstance(c1, TracedCurve) else c1
    p2 = c2.curve if isinstance(c2, TracedCurve) else c2
    s2 = p2.transform(SIGMA)
    crossings = intersect_polylines(p1, s2)
    kept, removed = [], []
    for c in crossings:
        ip = ImagePoint(c.point, c.seg1, c.t1, c.seg2, c.t2, c.angle)
        (removed if _forbidden(c.point) else kept).append(ip)
    # merge duplicates reported on neighbouring pieces
    uniq = []
    for ip in kept:
        if all(quotient_distance(ip.point.as_tuple(), u.point.as_tuple()) > FORBIDDEN_TOL for u in uniq):
            uniq.append(ip)
    report = None
    if distance_to_polyline(HALF, p1) < near and distance_to_polyline(HALF, s2) < near:
        at_half = [c for c in crossings if quotient_distance(c.point.as_tuple(), HALF) < near]
        ang = max((c.angle for c in at_half), default=0.0)
        report = {"both_through_half": True, "angle_at_half": ang, "transverse": ang > 1e-3,
                  "other_points": len(uniq), "second_point_found": len(uniq) > 0}
    return IntersectionResult(tuple(uniq), tuple(crossings), tuple(removed), report)


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True, eq=False)
class GluedCertificate:
    point: PillowPoint
    assignment: RepAssignment
    residual: float
    nonabelian_defect: float
    group: FPGroup
    n_side1: int
    info: dict = field(default_factory=dict)

    @property
    def positive(self) -> bool:
        return self.residual < CERT_TOL and self.nonabelian_defect > DEFECT_MIN

    def to_json(self) -> dict:
        return {
            "point": {"alpha": self.point.alpha, "beta": self.point.beta},
            "residual": self.residual,
            "nonabelian_defect": self.nonabelian_defect,
            "positive": self.positive,
            "generators": {g: list(v.as_tuple()) for g, v in zip(self.assignment.generators,
                                                                  self.assignment.values)},
            "group": self.group.to_dict(),
            "info": self.info,
        }


def cross_defect(Q, n1: int) -> float:
    """Largest commutator defect between a side-1 and a side-2 generator."""
    Q = np.asarray(Q, dtype=float)
    best = 0.0
    for i in range(n1):
        for j in range(n1, len(Q)):
            best = max(best, float(commutator_defect_array(Q[i], Q[j])))
    return best


def _diagonalized(group: FPGroup, Q):
    m = UnitQuaternion.from_array(eval_word_array(group.mu_word, Q))
    lam = UnitQuaternion.from_array(eval_word_array(group.lambda_word, Q))
    d = simultaneous_diagonalize(m, lam, tol=1e-7, edge_tol=1e-9)
    g = d.conjugator.as_array()
    return qmul(qmul(g[None], Q), qinv(g)[None])


def _matching_residual(group: FPGroup, Q) -> float:
    one = np.array([1.0, 0, 0, 0])
    return max(float(np.linalg.norm(eval_word_array(r, Q) - one)) for r in group.relators)


def build_glued_representation(problem: SpliceProblem, point, w1: RepAssignment,
                               w2: RepAssignment) -> GluedCertificate:
    """Conjugate both witnesses onto the standard torus, then refine them
    jointly on the amalgamated presentation."""
    g1, g2 = problem.side1, problem.side2
    n1 = g1.n_generators
    group = problem.amalgam()
    try:
        Q1 = _diagonalized(g1, w1.as_array())
        Q2 = _diagonalized(g2, w2.as_array())
    except NonCommutingPair as exc:
        raise MatchingFailed(f"witness peripheral images do not commute: {exc}") from None
    # conjugating side 2 by j flips (a, b) -> (-a, -b); keep whichever matches
    best = None
    for flip in (False, True):
        Q2f = qmul(qmul(QJ.as_array()[None], Q2), qinv(QJ.as_array())[None]) if flip else Q2
        Q = np.concatenate([Q1, Q2f], axis=0)
        r = _matching_residual(group, Q)
        if best is None or r < best[0]:
            best = (r, Q)
    mismatch, Q = best
    if mismatch > 0.1:
        raise MatchingFailed(f"witnesses do not match across the gluing (mismatch {mismatch:.3e})")
    Q = gauge_fix(Q[None])
    system = System.for_group(group)
    Q, res = levenberg_marquardt(system, Q, tol=1e-15, max_iter=400)
    Q = Q[0]
    res = _matching_residual(group, Q)
    if not res < MATCH_TOL:
        raise MatchingFailed(f"joint refinement stalled at residual {res:.3e}")
    assign = RepAssignment.from_array(group, Q)
    p = point if isinstance(point, PillowPoint) else PillowPoint(*point)
    return GluedCertificate(p, assign, res, cross_defect(Q, n1), group, n1, {"initial_mismatch": mismatch})


def verify_certificate(cert: GluedCertificate) -> dict:
    """Re-evaluate every relator (side relators and matching words) with
    scalar quaternion products, independent of the solver."""
    vals = list(cert.assignment.values)
    one = UnitQuaternion(1.0, 0.0, 0.0, 0.0)
    res = max(eval_word(r, vals).distance(one) for r in cert.group.relators)
    defect = 0.0
    for i in range(cert.n_side1):
        for j in range(cert.n_side1, len(vals)):
            defect = max(defect, (vals[i] * vals[j]).distance(vals[j] * vals[i]))
    forbidden = _forbidden(cert.point)
    return {"residual": res, "nonabelian_defect": defect, "forbidden_point": forbidden,
            "ok": res < CERT_TOL and defect > DEFECT_MIN and not forbidden}


# ---------------------------------------------------------------------------
# search


@dataclass(frozen=True)
class NoneFound:
    """No certificate; ``diagnostic`` locates ``sigma(c2)`` among the
    components of the complement of ``gamma_1 + tau(gamma_1)``."""

    tried: tuple
    diagnostic: dict

    positive = False

    def to_json(self) -> dict:
        return {"found": False, "tried": list(self.tried), "diagnostic": self.diagnostic}


@dataclass(frozen=True, eq=False)
class SearchResult:
    certificate: GluedCertificate
    pair: str
    tried: tuple

    positive = True

    def to_json(self) -> dict:
        d = self.certificate.to_json()
        d.update({"found": True, "pair": self.pair, "tried": list(self.tried)})
        return d


def _witness(tc: TracedCurve, seg: int, t: float) -> RepAssignment:
    k = min(seg + (1 if t > 0.5 else 0), len(tc.witnesses) - 1)
    return tc.witnesses[k]


def _gammas(group: FPGroup, step: float, grid: int, seed: int):
    curves = trace_pillowcase_image(group, step=step, grid=grid, seed=seed)
    loops = closed_loops(group, curves)
    try:
        gamma = select_gamma(loops, group)
        note = "selected"
    except SelectionFailed as exc:
        # fall back to the first essential loop
        if not loops:
            raise
        gamma = loops[0]
        note = f"fallback: {exc}"
    return curves, loops, gamma, tau_curve(gamma, group), note


L_PI_SAMPLES = {"left": (PI / 8, PI / 2), "middle": (PI / 2, PI), "right": (7 * PI / 8, 3 * PI / 2)}


def complement_diagnostic(gamma1: TracedCurve, tau_gamma1: TracedCurve, c2_sigma: Polyline,
                          resolution: int = 128) -> dict:
    """Components ``X_l, X_m, X_r`` of the complement of
    ``gamma_1 + tau(gamma_1)`` containing the three pieces of ``L_pi``, and
    the components met by ``sigma(c2)``."""
    lab = components_of_complement([gamma1.curve, tau_gamma1.curve], resolution=resolution)
    comp = {}
    for name, p in L_PI_SAMPLES.items():
        try:
            comp[name] = lab.component_of(p)
        except PointOnCurve:
            comp[name] = None
    met = set()
    for p in c2_sigma.canonical:
        try:
            met.add(lab.component_of(tuple(p)))
        except PointOnCurve:
            continue
    return {"n_components": lab.n_components, "X_l": comp["left"], "X_m": comp["middle"],
            "X_r": comp["right"], "sigma_c2_components": sorted(met),
            "distinct": len({v for v in comp.values() if v is not None}) == 3}


def search_nonabelian(problem: SpliceProblem, side_curves=None):
    """Try ``gamma_1, tau(gamma_1)`` against ``sigma(gamma_2)`` and then
    ``sigma(tau(gamma_2))``; the first positive certificate wins.

    ``side_curves`` optionally supplies ``(gamma_j, tau(gamma_j))`` pairs for
    both sides, skipping the tracing.
    """
    if problem.klein:
        curves = trace_pillowcase_image(problem.side1, step=problem.step, grid=problem.grid, seed=problem.seed)
        loops = closed_loops(problem.side1, curves)
        kg = glue_with_klein_bundle(loops, problem.epsilon, problem.side1)
        n1 = problem.side1.n_generators
        Q = kg.assignment.as_array()
        cert = GluedCertificate(kg.point, kg.assignment, kg.residual, cross_defect(Q, n1), kg.group, n1,
                                dict(kg.info, klein=True))
        return SearchResult(cert, "klein", ("klein",))
    if side_curves is None:
        s1 = _gammas(problem.side1, problem.step, problem.grid, problem.seed)
        same = problem.side1 == problem.side2
        s2 = s1 if same else _gammas(problem.side2, problem.step, problem.grid, problem.seed)
        (g1, tg1), (g2, tg2) = (s1[2], s1[3]), (s2[2], s2[3])
    else:
        (g1, tg1), (g2, tg2) = side_curves
    pairs = [("gamma1", g1, "sigma(gamma2)", g2), ("tau(gamma1)", tg1, "sigma(gamma2)", g2),
             ("gamma1", g1, "sigma(tau(gamma2))", tg2), ("tau(gamma1)", tg1, "sigma(tau(gamma2))", tg2)]
    with ThreadPoolExecutor(max_workers=n_threads()) as pool:
        results = list(pool.map(lambda p: intersect_images(p[1], p[3]), pairs))
    tried = []
    for (n1_, c1, n2_, c2), res in zip(pairs, results):
        label = f"{n1_} x {n2_}"
        tried.append(f"{label}: {len(res)} point(s)")
        # prefer points well away from beta = 0 on either side
        order = sorted(res.points, key=lambda ip: -min(abs(math.sin(ip.point.beta / 2)),
                                                       abs(math.sin(SIGMA(ip.point).beta / 2))))
        for ip in order:
            w1 = _witness(c1, ip.seg1, ip.t1)
            w2 = _witness(c2, ip.seg2, ip.t2)
            try:
                cert = build_glued_representation(problem, ip.point, w1, w2)
            except MatchingFailed as exc:
                tried.append(f"{label} at ({ip.point.alpha:.4f},{ip.point.beta:.4f}): {exc}")
                continue
            if cert.positive:
                cert = GluedCertificate(cert.point, cert.assignment, cert.residual, cert.nonabelian_defect,
                                        cert.group, cert.n_side1,
                                        dict(cert.info, pair=label, transversality=res.transversality))
                return SearchResult(cert, label, tuple(tried))
            tried.append(f"{label} at ({ip.point.alpha:.4f},{ip.point.beta:.4f}): abelian gluing")
    diag = complement_diagnostic(g1, tg1, g2.curve.transform(SIGMA))
    return NoneFound(tuple(tried), diag)
