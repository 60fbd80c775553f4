"""Representations of the twisted I-bundle over the Klein bottle and the
gluing of a knot exterior to it.

The group is ``<a, b | a b a^-1 = b^-1>`` with fiber ``sigma = a^2`` and
rational longitude ``lambda = b``.  Up to conjugacy a representation has
``(rho(sigma), rho(lambda))`` equal to ``(e^{i alpha}, +-1)`` (abelian) or
``(-1, e^{i beta})`` (realized by ``a = j``), and nothing else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidTarget, LiftObstructed, NoIntersection, NonCommutingPair
from .groups import (
    FPGroup,
    RepAssignment,
    amalgamate,
    eval_word,
    eval_word_array,
    inverse_word,
    klein_group,
    power_word,
    reduce_word,
    relator_residuals_array,
)
from .pillowcase import PI, PillowPoint, Polyline, intersect_polylines, lift_to_cut_open
from .reps import Equation, System, levenberg_marquardt
from .su2 import ALGEBRA_TOL, QJ, UnitQuaternion, from_circle, qinv, qmul, simultaneous_diagonalize
from .tracing import TracedCurve, make_curve

KLEIN = klein_group()
CLASSIFY_TOL = 1e-5


# ---------------------------------------------------------------------------
# closed-form representations


def _on_circle(q: UnitQuaternion, tol: float) -> bool:
    return math.hypot(q.y, q.z) < tol


def _is_pm_one(q: UnitQuaternion, tol: float) -> bool:
    return min(q.distance(UnitQuaternion(1.0, 0, 0, 0)), q.distance(UnitQuaternion(-1.0, 0, 0, 0))) < tol


@dataclass(frozen=True)
class KleinRepTarget:
    """Prescribed images of ``sigma`` and ``lambda`` on the circle ``e^{it}``."""

    sigma_value: UnitQuaternion
    lambda_value: UnitQuaternion
    tol: float = ALGEBRA_TOL

    def __post_init__(self):
        s, lam = self.sigma_value, self.lambda_value
        if not (_on_circle(s, self.tol) and _on_circle(lam, self.tol)):
            raise InvalidTarget("target values must lie on the circle e^{it}")
        if not (_is_pm_one(lam, self.tol) or s.distance(UnitQuaternion(-1.0, 0, 0, 0)) < self.tol):
            raise InvalidTarget(
                f"(e^{{i{s.circle_angle():.6g}}}, e^{{i{lam.circle_angle():.6g}}}) is neither "
                "(e^{ia}, +-1) nor (-1, e^{ib})"
            )

    @classmethod
    def from_angles(cls, alpha: float, beta: float) -> "KleinRepTarget":
        return cls(from_circle(alpha), from_circle(beta))

    @property
    def nonabelian(self) -> bool:
        return not _is_pm_one(self.lambda_value, self.tol)


def realize_klein_rep(target: KleinRepTarget) -> RepAssignment:
    """A representation with ``rho(a^2) = sigma_value`` and ``rho(b) =
    lambda_value``."""
    lam = target.lambda_value
    if target.nonabelian:
        a = QJ
    else:
        a = from_circle(target.sigma_value.circle_angle() / 2)
    Q = np.array([a.as_array(), lam.as_array()])
    rep = RepAssignment.from_array(KLEIN, Q, sigma=target.sigma_value.as_tuple(), lam=lam.as_tuple())
    return replace(rep, abelian=not target.nonabelian)


# ---------------------------------------------------------------------------
# brute-force oracle for the classification


@dataclass(frozen=True)
class ClassificationReport:
    samples: int
    converged: int
    max_deviation: float
    n_abelian: int
    n_nonabelian: int
    max_residual: float
    mode: str
    lambda_coverage: float = math.nan
    seed: int = 0

    @property
    def ok(self) -> bool:
        return self.converged > 0 and self.max_deviation < CLASSIFY_TOL

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["ok"] = self.ok
        return d


def classified_deviation(A, B) -> np.ndarray:
    """Distance of batched pairs ``(a, b)`` from the classified set, measured
    conjugation-invariantly as ``min(|b - 1|, |b + 1|, |a^2 + 1|)``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    one = np.array([1.0, 0, 0, 0])
    sig = qmul(A, A)
    return np.minimum(np.minimum(np.linalg.norm(B - one, axis=-1), np.linalg.norm(B + one, axis=-1)),
                      np.linalg.norm(sig + one, axis=-1))


def _random_unit(rng, n):
    x = rng.standard_normal((n, 4))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def classify_by_bruteforce(samples: int = 10**6, seed: int = 0, mode: str = "generic",
                           chunk: int = 250_000, tol: float = 1e-10) -> ClassificationReport:
    """Sample pairs, push them onto the relator's zero set and measure how far
    the resulting ``(rho(sigma), rho(lambda))`` classes sit from the
    classified set.

    ``mode`` is ``generic`` (Haar-random starts refined by batched
    Levenberg-Marquardt), ``abelian`` (commuting starts) or ``sigma`` (``a``
    forced to square to ``-1``; ``b`` is projected onto the relator's zero
    set by removing its component along ``a``).
    """
    if samples < 10**4:
        raise ValueError("need at least 10^4 samples")
    if mode not in ("generic", "abelian", "sigma"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    system = System(2, [Equation(KLEIN.relators[0])], gauge=False)
    conv = 0
    dev_max = 0.0
    res_max = 0.0
    n_ab = 0
    bins = np.zeros(64, dtype=bool)
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        done += n
        if mode == "sigma":
            v = rng.standard_normal((n, 3))
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            A = np.concatenate([np.zeros((n, 1)), v], axis=1)
            B = _random_unit(rng, n)
            B[:, 1:] -= np.sum(B[:, 1:] * v, axis=1, keepdims=True) * v
            B /= np.linalg.norm(B, axis=1, keepdims=True)
            Q = np.stack([A, B], axis=1)
        else:
            if mode == "abelian":
                A = _random_unit(rng, n)
                u = A[:, 1:] / np.maximum(np.linalg.norm(A[:, 1:], axis=1, keepdims=True), 1e-300)
                t = rng.uniform(0, 2 * PI, n)
                B = np.concatenate([np.cos(t)[:, None], np.sin(t)[:, None] * u], axis=1)
                Q0 = np.stack([A, B], axis=1)
            else:
                Q0 = np.stack([_random_unit(rng, n), _random_unit(rng, n)], axis=1)
            Q, _ = levenberg_marquardt(system, Q0, tol=1e-14, max_iter=60)
        res = relator_residuals_array(KLEIN, Q)
        ok = res < tol
        conv += int(ok.sum())
        if not ok.any():
            continue
        Qk = Q[ok]
        res_max = max(res_max, float(res[ok].max()))
        dev = classified_deviation(Qk[:, 0], Qk[:, 1])
        dev_max = max(dev_max, float(dev.max()))
        comm = np.linalg.norm(np.cross(Qk[:, 0, 1:], Qk[:, 1, 1:]), axis=1)
        n_ab += int(np.sum(comm < 1e-7))
        ang = np.arccos(np.clip(Qk[:, 1, 0], -1.0, 1.0))
        bins[np.minimum((ang / PI * len(bins)).astype(int), len(bins) - 1)] = True
    cov = float(bins.mean()) if mode == "sigma" else math.nan
    return ClassificationReport(samples, conv, dev_max, n_ab, conv - n_ab, res_max, mode, cov, seed)


# ---------------------------------------------------------------------------
# gluing a knot exterior to the Klein bundle


def klein_matching_words(g1: FPGroup, epsilon: int):
    """``(w1, w2)`` pairs identifying ``mu_2 ~ mu_1^-1 lambda_1^eps`` and
    ``lambda_2 ~ mu_1^eps`` (``mu_2 = a^2``, ``lambda_2 = b``)."""
    if epsilon not in (1, -1):
        raise ValueError("epsilon must be +1 or -1")
    w_mu2 = reduce_word(inverse_word(g1.mu_word) + power_word(g1.lambda_word, epsilon))
    w_lam2 = reduce_word(power_word(g1.mu_word, epsilon))
    return [(w_mu2, KLEIN.mu_word), (w_lam2, KLEIN.lambda_word)]


def klein_amalgam(g1: FPGroup, epsilon: int) -> FPGroup:
    return amalgamate(g1, KLEIN, klein_matching_words(g1, epsilon), name=f"{g1.name}+klein({epsilon:+d})")


def line_L_eps(theta: float, epsilon: int, samples: int = 721) -> Polyline:
    """``{(a, eps (a + theta)) : 0 <= a <= pi}``."""
    a = np.linspace(0.0, PI, samples)
    return Polyline(np.stack([a, epsilon * (a + theta)], -1), closed=False)


def synthetic_torus_curve(alpha: float = PI / 2, samples: int = 181):
    """The free abelian group ``<m, l | [m, l]>`` and its closed curve
    ``{alpha} x [0, 2pi]`` with abelian witnesses."""
    g = FPGroup(("m", "l"), ((1, 2, -1, -2),), (1,), (2,), None, "Z2")
    b = np.linspace(0.0, 2 * PI, samples)
    z = np.zeros_like(b)
    Q = np.stack([np.stack([np.full_like(b, math.cos(alpha)), np.full_like(b, math.sin(alpha)), z, z], -1),
                  np.stack([np.cos(b), np.sin(b), z, z], -1)], axis=1)
    coords = np.stack([np.full_like(b, alpha), b], -1)
    return g, make_curve(g, Q, closed=True, coords=coords, kind="synthetic")


@dataclass(frozen=True, eq=False)
class KleinGluing:
    """A representation of ``pi_1(M_1) *_{T^2} pi_1(N)``."""

    point: PillowPoint
    epsilon: int
    group: FPGroup
    assignment: RepAssignment
    side1: RepAssignment
    side2: RepAssignment
    residual: float
    info: dict = field(default_factory=dict)

    @property
    def nonabelian(self) -> bool:
        return not self.side2.abelian

    def to_json(self) -> dict:
        return {"point": list(self.point.as_tuple()), "epsilon": self.epsilon, "residual": self.residual,
                "nonabelian": self.nonabelian, "group": self.group.to_dict(),
                "assignment": self.assignment.to_json(), "info": self.info}


def _conjugate(Q, g: UnitQuaternion):
    ga = g.as_array()
    return qmul(qmul(ga[None], Q), qinv(ga)[None])


def glue_with_klein_bundle(m1_curves, epsilon: int, g1: FPGroup, tol: float = 1e-8) -> KleinGluing:
    """Glue along ``lambda_1 ~ mu_2^eps lambda_2`` using a point of an
    essential closed curve on the line ``beta = eps (alpha + pi)``.

    At such a point ``rho(mu_1^-1 lambda_1^eps) = -1`` and ``rho(mu_1^eps)``
    is off the center, so ``a -> j``, ``b -> rho(mu_1^eps)`` extends it over
    the Klein bundle with non-abelian image.
    """
    words = klein_matching_words(g1, epsilon)
    line = line_L_eps(PI, epsilon)
    extra = [Equation(words[0][0], (-1.0, 0.0, 0.0, 0.0))]
    system = System.for_group(g1, extra=extra)
    reasons = []
    for ci, tc in enumerate(m1_curves):
        curve = tc.curve if isinstance(tc, TracedCurve) else tc
        if not curve.closed:
            continue
        try:
            wind = lift_to_cut_open(curve).winding
        except LiftObstructed as exc:
            reasons.append(f"curve {ci}: {exc}")
            continue
        if wind == 0:
            reasons.append(f"curve {ci} is inessential (winding 0)")
            continue
        for cr in intersect_polylines(curve, line):
            p = cr.point
            if not (1e-6 < p.alpha < PI - 1e-6):
                continue
            k = cr.seg1 + (1 if cr.t1 > 0.5 else 0)
            k = min(k, len(tc.witnesses) - 1)
            Q0 = tc.witnesses[k].as_array()
            Q, res = levenberg_marquardt(system, Q0[None], tol=1e-15, max_iter=200)
            Q = Q[0]
            if not res[0] < 1e-10:
                reasons.append(f"curve {ci}: refinement at ({p.alpha:.4f},{p.beta:.4f}) stalled at {res[0]:.1e}")
                continue
            m = UnitQuaternion.from_array(eval_word_array(g1.mu_word, Q))
            lam = UnitQuaternion.from_array(eval_word_array(g1.lambda_word, Q))
            try:
                diag = simultaneous_diagonalize(m, lam, tol=1e-8)
            except NonCommutingPair as exc:
                reasons.append(f"curve {ci}: {exc}")
                continue
            Q1 = _conjugate(Q, diag.conjugator)
            b = eval_word_array(words[1][0], Q1)
            if _is_pm_one(UnitQuaternion.from_array(b), 1e-6):
                reasons.append(f"curve {ci}: rho(mu_1^eps) is central at ({p.alpha:.4f},{p.beta:.4f})")
                continue
            # b lies on the i-circle after diagonalization; a = j inverts it
            b[2:] = 0.0
            b /= np.linalg.norm(b)
            Q2 = np.array([QJ.as_array(), b])
            group = klein_amalgam(g1, epsilon)
            full = np.concatenate([Q1, Q2], axis=0)
            glued = RepAssignment.from_array(group, full)
            if glued.residual > tol:
                reasons.append(f"curve {ci}: glued residual {glued.residual:.2e}")
                continue
            side1 = RepAssignment.from_array(g1, Q1)
            side2 = RepAssignment.from_array(KLEIN, Q2)
            point = PillowPoint(diag.alpha, diag.beta)
            return KleinGluing(point, epsilon, group, glued, side1, side2, glued.residual,
                               {"curve": ci, "winding": wind, "crossing": list(p.as_tuple())})
    raise NoIntersection("; ".join(reasons) if reasons else "no closed essential curve meets the line")


def verify_klein_gluing(g: KleinGluing, g1: FPGroup) -> dict:
    """Recheck a gluing with scalar quaternion arithmetic."""
    vals = list(g.assignment.values)
    worst = 0.0
    for r in g.group.relators:
        worst = max(worst, eval_word(r, vals).distance(UnitQuaternion(1.0, 0, 0, 0)))
    n1 = g1.n_generators
    a, b = vals[n1], vals[n1 + 1]
    return {"residual": worst, "sigma": (a * a).as_tuple(), "lambda": b.as_tuple(),
            "nonabelian_defect": float(2 * np.linalg.norm(np.cross(a.as_array()[1:], b.as_array()[1:])))}
