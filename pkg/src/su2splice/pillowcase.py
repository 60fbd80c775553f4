"""Geometry of the pillowcase orbifold and the cut-open pillowcase.

Points are stored as canonical representatives in the fundamental domain
``[0, pi] x [0, 2pi)``.  Curves (:class:`Polyline`) keep a *lifted* copy of
their vertices in the plane, i.e. a continuous path in the universal cover of
the torus double cover.  The pillowcase is the quotient of the plane by the
group generated by ``x -> -x`` and translations by ``2 pi Z^2``; every
geometric query below works on lifts and ranges over that group where needed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import LiftObstructed, PointOnCurve, TangencyUnresolved
from .su2 import SOLVER_TOL, TWO_PI, canonical_angles

PI = math.pi
DEFAULT_STEP_BOUND = 0.05
TANGENCY_ANGLE = 1e-3


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class PillowPoint:
    """A point of the pillowcase; the stored pair is always canonical."""

    alpha: float
    beta: float

    def __post_init__(self):
        a, b = canonical_angles(self.alpha, self.beta)
        object.__setattr__(self, "alpha", float(a))
        object.__setattr__(self, "beta", float(b))

    def as_tuple(self):
        return (self.alpha, self.beta)

    def distance(self, other: "PillowPoint") -> float:
        return quotient_distance(self.as_tuple(), other.as_tuple())

    def __iter__(self):
        return iter((self.alpha, self.beta))


@dataclass(frozen=True)
class CutOpenPoint:
    """A point of the cylinder ``[0, pi] x R/2piZ`` (no folding of the edges)."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (0.0 <= self.alpha <= PI):
            raise ValueError(f"alpha {self.alpha} outside [0, pi]")
        object.__setattr__(self, "beta", float(self.beta) % TWO_PI)


def normalize(alpha: float, beta: float) -> PillowPoint:
    """Canonical representative of ``(alpha, beta)``."""
    return PillowPoint(alpha, beta)


def images(xy, box_margin: float | None = None):
    """All images of points under the orbifold group that can matter for a
    fundamental-domain computation: ``+-x + 2 pi (m, n)``, ``m, n in {-1,0,1}``.

    ``xy`` has shape (N, 2); returns shape (18 N, 2) ordered image-major.
    With ``box_margin`` set, only images inside the fundamental domain grown by
    that margin are returned.
    """
    xy = np.atleast_2d(np.asarray(xy, dtype=float))
    out = []
    for s in (1.0, -1.0):
        for m in (-1, 0, 1):
            for n in (-1, 0, 1):
                out.append(s * xy + TWO_PI * np.array([m, n], dtype=float))
    pts = np.concatenate(out, axis=0)
    if box_margin is not None:
        keep = (
            (pts[:, 0] >= -box_margin)
            & (pts[:, 0] <= PI + box_margin)
            & (pts[:, 1] >= -box_margin)
            & (pts[:, 1] <= TWO_PI + box_margin)
        )
        pts = pts[keep]
    return pts


def canonical_array(xy) -> np.ndarray:
    if isinstance(xy, PillowPoint):
        xy = xy.as_tuple()
    xy = np.atleast_2d(np.asarray(xy, dtype=float))
    a, b = canonical_angles(xy[:, 0], xy[:, 1])
    return np.stack([a, b], axis=-1)


def quotient_distance(p, q) -> float:
    """Distance in the quotient metric: min over the representatives of ``q``."""
    p = canonical_array(p)[0]
    reps = images(canonical_array(q))
    return float(np.min(np.linalg.norm(reps - p, axis=1)))


# ---------------------------------------------------------------------------
# involutions


@dataclass(frozen=True)
class AffineInvolution:
    """An affine map ``x -> A x + b`` of the plane that descends to the
    pillowcase (``A`` integral, ``b`` in ``pi Z^2``)."""

    matrix: tuple
    offset: tuple
    name: str = ""

    def apply_xy(self, xy):
        xy = np.asarray(xy, dtype=float)
        A = np.asarray(self.matrix, dtype=float)
        return xy @ A.T + np.asarray(self.offset, dtype=float)

    def __call__(self, p):
        if isinstance(p, Polyline):
            return p.transform(self)
        x = self.apply_xy(np.asarray(tuple(p), dtype=float))
        return PillowPoint(x[0], x[1])


def gluing_involution(n: int) -> AffineInvolution:
    """The involution ``(a, b) -> (a, 2pi - (n a + b))`` attached to a gluing
    ``mu1 ~ mu2, lambda1^-1 ~ mu2^n lambda2``.  Only ``n = 4`` is used by the
    splice engine; other ``n`` are exposed for experimentation."""
    return AffineInvolution(((1, 0), (-n, -1)), (0.0, TWO_PI), f"sigma_{n}")


SIGMA = gluing_involution(4)
TAU = AffineInvolution(((-1, 0), (0, -1)), (PI, TWO_PI), "tau")


def sigma(p):
    """``(a, b) -> (a, 2pi - (4a + b))``."""
    return SIGMA(p)


def tau(p):
    """``(a, b) -> (pi - a, 2pi - b)``."""
    return TAU(p)


# ---------------------------------------------------------------------------
# polylines


@dataclass(frozen=True, eq=False)
class Polyline:
    """A piecewise-linear curve in the pillowcase.

    ``coords`` is the continuous lift of the vertices; ``closed`` curves have
    first and last vertex equal in the quotient.
    """

    coords: np.ndarray
    closed: bool = False

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1, 2)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @classmethod
    def from_points(cls, points: Iterable, closed: bool = False) -> "Polyline":
        """Build from quotient points, choosing at each step the representative
        nearest the previous lifted vertex."""
        pts = np.array([tuple(p) for p in points], dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            return cls(np.zeros((0, 2)), closed)
        lifted = lift_sequence(pts)
        if closed and quotient_distance(lifted[0], lifted[-1]) > 1e-12:
            lifted = np.vstack([lifted, lift_sequence(np.vstack([lifted[-1], lifted[0]]))[1]])
        return cls(lifted, closed)

    def __len__(self):
        return len(self.coords)

    @property
    def canonical(self) -> np.ndarray:
        return canonical_array(self.coords) if len(self.coords) else np.zeros((0, 2))

    def points(self) -> list:
        return [PillowPoint(a, b) for a, b in self.canonical]

    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.coords, axis=0), axis=1)

    def length(self) -> float:
        return float(self.segment_lengths().sum())

    def max_step(self) -> float:
        return float(self.segment_lengths().max()) if len(self) > 1 else 0.0

    def check_steps(self, bound: float = DEFAULT_STEP_BOUND) -> bool:
        return self.max_step() < bound

    def transform(self, f: AffineInvolution) -> "Polyline":
        return Polyline(f.apply_xy(self.coords), self.closed)

    def reversed(self) -> "Polyline":
        return Polyline(self.coords[::-1], self.closed)

    def resample(self, spacing: float) -> "Polyline":
        """Insert vertices so that no segment is longer than ``spacing``."""
        if len(self) < 2:
            return self
        out = [self.coords[:1]]
        for p, q in zip(self.coords[:-1], self.coords[1:]):
            k = max(1, int(math.ceil(np.linalg.norm(q - p) / spacing)))
            t = np.arange(1, k + 1)[:, None] / k
            out.append(p + t * (q - p))
        return Polyline(np.vstack(out), self.closed)

    def point_at(self, seg: int, t: float) -> np.ndarray:
        return self.coords[seg] + t * (self.coords[seg + 1] - self.coords[seg])


def lift_sequence(pts) -> np.ndarray:
    """Continuous lift of a sequence of quotient points."""
    pts = np.asarray(pts, dtype=float)
    out = np.empty_like(pts)
    out[0] = pts[0]
    for k in range(1, len(pts)):
        prev = out[k - 1]
        best, bestd = None, np.inf
        for s in (1.0, -1.0):
            cand = s * pts[k]
            shift = TWO_PI * np.round((prev - cand) / TWO_PI)
            cand = cand + shift
            d = np.linalg.norm(cand - prev)
            if d < bestd:
                best, bestd = cand, d
        out[k] = best
    return out


def concat(*curves: Polyline, closed: bool = False) -> Polyline:
    """Join polylines end to start, re-lifting each piece onto the previous."""
    pts = []
    for c in curves:
        canon = c.canonical
        if pts and len(canon) and quotient_distance(pts[-1], canon[0]) < 1e-12:
            canon = canon[1:]
        pts.extend(canon.tolist())
    return Polyline.from_points(pts, closed=closed)


def line_L(theta: float, samples: int = 401, n: int = 4) -> Polyline:
    """The arc ``{n a + b = theta mod 2pi}`` sampled for ``a`` in ``[0, pi]``."""
    if samples < 2:
        raise ValueError("need at least two samples")
    a = np.linspace(0.0, PI, samples)
    return Polyline(np.stack([a, theta - n * a], axis=-1))


def line_L_pi_segments(samples: int = 101, margin: float = 1e-6) -> dict:
    """The three pieces of ``L_pi`` cut at ``a = pi/4`` and ``a = 3pi/4``.

    The cut points themselves are excluded (``margin`` away); the outer ends
    at the punctures are included.
    """
    pieces = {
        "left": (0.0, PI / 4 - margin, PI),
        "middle": (PI / 4 + margin, 3 * PI / 4 - margin, 3 * PI),
        "right": (3 * PI / 4 + margin, PI, 5 * PI),
    }
    out = {}
    for name, (lo, hi, c) in pieces.items():
        a = np.linspace(lo, hi, samples)
        out[name] = Polyline(np.stack([a, c - 4 * a], axis=-1))
    return out


def on_line_mod_pi(p, r: int, s: int, tol: float = SOLVER_TOL) -> bool:
    """Whether ``r a + s b`` is a multiple of pi at ``p``.

    The condition is invariant under the orbifold group, so checking the
    canonical representative covers all representatives.
    """
    if math.gcd(r, s) != 1:
        raise ValueError("slope must be primitive")
    a, b = PillowPoint(*p).as_tuple()
    v = (r * a + s * b) / PI
    return abs(v - round(v)) * PI < tol


# ---------------------------------------------------------------------------
# intersections


@dataclass(frozen=True)
class Crossing:
    point: PillowPoint
    sign: int
    tangential: bool
    seg1: int
    t1: float
    seg2: int
    t2: float
    angle: float

    def __iter__(self):
        return iter((self.point, self.sign))


_PIECE = 0.25


def _pieces(c: Polyline):
    """Split segments into short pieces; returns (P0, P1, seg, ta, tb)."""
    P0, P1, seg, ta, tb = [], [], [], [], []
    for k in range(len(c) - 1):
        p, q = c.coords[k], c.coords[k + 1]
        m = max(1, int(math.ceil(np.linalg.norm(q - p) / _PIECE)))
        ts = np.linspace(0.0, 1.0, m + 1)
        for i in range(m):
            P0.append(p + ts[i] * (q - p))
            P1.append(p + ts[i + 1] * (q - p))
            seg.append(k)
            ta.append(ts[i])
            tb.append(ts[i + 1])
    return (np.array(P0).reshape(-1, 2), np.array(P1).reshape(-1, 2), np.array(seg, dtype=int),
            np.array(ta), np.array(tb))


def _cross2(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def intersect_polylines(c1: Polyline, c2: Polyline, angle_tol: float = TANGENCY_ANGLE) -> list:
    """All crossings of two polylines in the pillowcase.

    Each crossing carries its orientation sign (sign of ``d1 x d2``) and is
    flagged ``tangential`` (sign 0) when the crossing angle is below
    ``angle_tol`` or the segments overlap.  Segments are half-open except the
    last segment of an open polyline, so a crossing at a shared vertex is
    reported once.
    """
    if len(c1) < 2 or len(c2) < 2:
        return []
    A0, A1, Aseg, Ata, Atb = _pieces(c1)
    B0, B1, Bseg, Bta, Btb = _pieces(c2)
    # move c1 pieces so they start in the fundamental square of the torus
    shiftA = TWO_PI * np.floor(A0 / TWO_PI)
    A0, A1 = A0 - shiftA, A1 - shiftA
    imgs0, imgs1, idx = [], [], []
    for s in (1.0, -1.0):
        b0, b1 = s * B0, s * B1
        sh = TWO_PI * np.floor(b0 / TWO_PI)
        b0, b1 = b0 - sh, b1 - sh
        for m in (-1, 0, 1):
            for n in (-1, 0, 1):
                t = TWO_PI * np.array([m, n], dtype=float)
                imgs0.append(b0 + t)
                imgs1.append(b1 + t)
                idx.append(np.arange(len(B0)))
    I0, I1, Iidx = np.vstack(imgs0), np.vstack(imgs1), np.concatenate(idx)
    treeA = cKDTree(0.5 * (A0 + A1))
    treeB = cKDTree(0.5 * (I0 + I1))
    pairs = treeA.query_ball_tree(treeB, r=_PIECE * 1.01)
    ia, ib = [], []
    for i, lst in enumerate(pairs):
        ia.extend([i] * len(lst))
        ib.extend(lst)
    if not ia:
        return []
    ia, ib = np.array(ia), np.array(ib)
    p, r = A0[ia], A1[ia] - A0[ia]
    q, s = I0[ib], I1[ib] - I0[ib]
    denom = _cross2(r, s)
    qp = q - p
    nr = np.linalg.norm(r, axis=1)
    ns = np.linalg.norm(s, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = _cross2(qp, s) / denom
        u = _cross2(qp, r) / denom
    eps = 1e-12
    last1 = len(c1) - 2
    last2 = len(c2) - 2
    bseg = Bseg[Iidx[ib]]
    bta, btb = Bta[Iidx[ib]], Btb[Iidx[ib]]
    aseg, ata, atb = Aseg[ia], Ata[ia], Atb[ia]
    # global parameters along the original segments
    T = ata + t * (atb - ata)
    U = bta + u * (btb - bta)
    endA = np.where((aseg == last1) & (not c1.closed), 1.0 + eps, 1.0 - eps)
    endB = np.where((bseg == last2) & (not c2.closed), 1.0 + eps, 1.0 - eps)
    nonpar = np.abs(denom) > 1e-300
    ok = nonpar & (t >= -eps) & (t <= 1 + eps) & (u >= -eps) & (u <= 1 + eps)
    ok &= (T >= -eps) & (T < endA) & (U >= -eps) & (U < endB)
    sin_angle = np.abs(denom) / np.maximum(nr * ns, 1e-300)
    out = []
    seen = []
    for k in np.nonzero(ok)[0]:
        x = p[k] + t[k] * r[k]
        key = (int(aseg[k]), round(float(T[k]), 9))
        if key in seen:
            continue
        seen.append(key)
        ang = math.asin(min(1.0, float(sin_angle[k])))
        tang = ang < angle_tol
        out.append(
            Crossing(PillowPoint(x[0], x[1]), 0 if tang else int(np.sign(denom[k])), bool(tang),
                     int(aseg[k]), float(min(max(T[k], 0.0), 1.0)), int(bseg[k]),
                     float(min(max(U[k], 0.0), 1.0)), ang)
        )
    # collinear overlaps: parallel pieces lying on the same line
    par = ~nonpar | (sin_angle < 1e-12)
    if np.any(par):
        col = par & (np.abs(_cross2(qp, r)) <= 1e-12 * np.maximum(nr, 1e-300))
        for k in np.nonzero(col)[0]:
            rr = float(np.dot(r[k], r[k]))
            if rr == 0:
                continue
            t0 = float(np.dot(qp[k], r[k]) / rr)
            t1 = float(np.dot(qp[k] + s[k], r[k]) / rr)
            lo, hi = max(0.0, min(t0, t1)), min(1.0, max(t0, t1))
            if lo <= hi:
                tm = 0.5 * (lo + hi)
                x = p[k] + tm * r[k]
                out.append(Crossing(PillowPoint(x[0], x[1]), 0, True, int(aseg[k]),
                                    float(ata[k] + tm * (atb[k] - ata[k])), int(bseg[k]), 0.0, 0.0))
    out.sort(key=lambda c: (c.seg1, c.t1))
    return out


def intersection_number(closed_curve: Polyline, arc: Polyline, angle_tol: float = TANGENCY_ANGLE) -> int:
    """Signed count of crossings of a closed curve with an arc (or another
    closed curve)."""
    if not closed_curve.closed:
        raise ValueError("first argument must be a closed polyline")
    crossings = intersect_polylines(closed_curve, arc, angle_tol)
    bad = [c for c in crossings if c.tangential]
    if bad:
        raise TangencyUnresolved(
            f"{len(bad)} near-tangential crossing(s), first at ({bad[0].point.alpha:.6f}, {bad[0].point.beta:.6f})"
        )
    return int(sum(c.sign for c in crossings))


# ---------------------------------------------------------------------------
# complement components


def _dense_samples(curves: Sequence[Polyline], spacing: float) -> np.ndarray:
    chunks = [c.resample(spacing).coords for c in curves if len(c)]
    if not chunks:
        return np.zeros((0, 2))
    return canonical_array(np.vstack(chunks))


@dataclass(eq=False)
class ComplementLabeling:
    """Connected components of the pillowcase minus thickened curves.

    ``labels`` has shape ``(resolution, 2*resolution)`` indexed by
    ``(alpha cell, beta cell)``; blocked cells hold -1.
    """

    resolution: int
    labels: np.ndarray
    _samples: np.ndarray = field(repr=False, default=None)

    @property
    def cell(self) -> float:
        return PI / self.resolution

    @property
    def n_components(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size and self.labels.max() >= 0 else 0

    def distance_to_curves(self, p) -> float:
        if self._samples is None or len(self._samples) == 0:
            return math.inf
        tree = cKDTree(images(self._samples))
        d, _ = tree.query(canonical_array(p)[0])
        return float(d)

    def component_of(self, p) -> int:
        p = PillowPoint(*p)
        h = self.cell
        if self.distance_to_curves(p) <= 2 * h:
            raise PointOnCurve(f"({p.alpha:.6f}, {p.beta:.6f}) lies within {2 * h:.4g} of a curve")
        R = self.resolution
        i = min(int(p.alpha / h), R - 1)
        j = min(int(p.beta / h), 2 * R - 1)
        if self.labels[i, j] >= 0:
            return int(self.labels[i, j])
        best, bestd = None, math.inf
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                ii, jj = i + di, (j + dj) % (2 * R)
                if 0 <= ii < R and self.labels[ii, jj] >= 0:
                    c = np.array([(ii + 0.5) * h, (jj + 0.5) * h])
                    d = quotient_distance(c, p.as_tuple())
                    if d < bestd:
                        best, bestd = int(self.labels[ii, jj]), d
        if best is None:
            raise PointOnCurve("no free cell near query point")
        return best

    def to_pgm(self, path) -> None:
        """Write the label raster as a binary PGM (blocked cells black)."""
        lab = self.labels.T[::-1]  # beta up, alpha right
        n = max(self.n_components, 1)
        img = np.where(lab < 0, 0, 40 + (lab * (215 // n))).astype(np.uint8)
        with open(path, "wb") as fh:
            fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
            fh.write(img.tobytes())


def components_of_complement(curves: Sequence[Polyline], resolution: int = 128,
                             half_width: float = 1.5) -> ComplementLabeling:
    """Label the components of the pillowcase minus the curves by flood fill
    on a ``resolution x 2 resolution`` raster with the edge identifications."""
    if resolution < 64:
        raise ValueError("resolution must be at least 64")
    R = resolution
    h = PI / R
    blocked = np.zeros((R, 2 * R), dtype=bool)
    samples = _dense_samples(curves, h / 4)
    if len(samples):
        pts = images(samples, box_margin=3 * h)
        base_i = np.floor(pts[:, 0] / h).astype(int)
        base_j = np.floor(pts[:, 1] / h).astype(int)
        for di in range(-2, 3):
            for dj in range(-2, 3):
                i = base_i + di
                j = base_j + dj
                inside = (i >= 0) & (i < R) & (j >= 0) & (j < 2 * R)
                ci = (i + 0.5) * h
                cj = (j + 0.5) * h
                near = np.hypot(ci - pts[:, 0], cj - pts[:, 1]) <= half_width * h
                sel = inside & near
                blocked[i[sel], j[sel]] = True
    idx = np.arange(R * 2 * R).reshape(R, 2 * R)
    rows, cols = [], []

    def link(a, b):
        m = ~blocked.ravel()[a.ravel()] & ~blocked.ravel()[b.ravel()]
        rows.append(a.ravel()[m])
        cols.append(b.ravel()[m])

    link(idx[:-1, :], idx[1:, :])  # alpha neighbours
    link(idx, np.roll(idx, -1, axis=1))  # beta, periodic
    J = np.arange(2 * R)
    link(idx[0, J], idx[0, 2 * R - 1 - J])  # alpha = 0 edge: b ~ 2pi - b
    link(idx[R - 1, J], idx[R - 1, 2 * R - 1 - J])  # alpha = pi edge
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    N = R * 2 * R
    graph = coo_matrix((np.ones(len(r)), (r, c)), shape=(N, N))
    _, lab = connected_components(graph, directed=False)
    lab = lab.reshape(R, 2 * R)
    labels = np.full((R, 2 * R), -1, dtype=int)
    free = ~blocked
    # renumber free components densely in scan order
    remap = {}
    for v in lab[free]:
        if v not in remap:
            remap[v] = len(remap)
    if remap:
        keys = np.array(list(remap.keys()))
        vals = np.array(list(remap.values()))
        lookup = np.full(lab.max() + 1, -1)
        lookup[keys] = vals
        labels[free] = lookup[lab[free]]
    return ComplementLabeling(R, labels, samples)


# ---------------------------------------------------------------------------
# cut-open pillowcase


@dataclass(frozen=True, eq=False)
class CutOpenLift:
    """A curve lifted to the cylinder: ``coords[:, 1]`` is unwrapped."""

    coords: np.ndarray
    closed: bool

    @property
    def points(self) -> list:
        return [CutOpenPoint(a, b) for a, b in self.coords]

    @property
    def drift(self) -> float:
        return float(self.coords[-1, 1] - self.coords[0, 1])

    @property
    def winding(self):
        """Class in ``H_1`` of the cylinder (closed curves), else drift / 2pi."""
        w = self.drift / TWO_PI
        return int(round(w)) if self.closed else w


def lift_to_cut_open(curve: Polyline, tol: float = 1e-6) -> CutOpenLift:
    """Lift a pillowcase curve to the cut-open pillowcase.

    The curve may touch ``{a = 0}`` or ``{a = pi}`` only where ``b = 0 mod
    2pi``; any other edge crossing raises :class:`LiftObstructed`.
    """
    x = curve.coords
    if len(x) == 0:
        return CutOpenLift(np.zeros((0, 2)), curve.closed)
    am = np.mod(x[:, 0], TWO_PI)
    sheet = np.where(am <= PI, 1.0, -1.0)
    edge = (np.abs(am) < tol) | (np.abs(am - PI) < tol) | (np.abs(am - TWO_PI) < tol)
    for k in range(len(x)):
        if edge[k] and abs(_wrap(x[k, 1])) > tol:
            raise LiftObstructed(f"vertex {k} lies on an edge at beta={x[k, 1] % TWO_PI:.6g}")
    for k in range(len(x) - 1):
        if sheet[k] != sheet[k + 1] and not (edge[k] or edge[k + 1]):
            # locate the edge crossing on the segment
            a0, a1 = x[k, 0], x[k + 1, 0]
            m = math.floor(max(a0, a1) / PI) * PI
            t = (m - a0) / (a1 - a0) if a1 != a0 else 0.0
            b = x[k, 1] + t * (x[k + 1, 1] - x[k, 1])
            if abs(_wrap(b)) > tol:
                raise LiftObstructed(f"segment {k} crosses an edge at beta={b % TWO_PI:.6g}")
    folded_a = np.where(sheet > 0, am, TWO_PI - am)
    sb = sheet * x[:, 1]
    out_b = np.empty(len(x))
    out_b[0] = sb[0] % TWO_PI
    for k in range(1, len(x)):
        out_b[k] = out_b[k - 1] + _wrap(sb[k] - sb[k - 1])
    return CutOpenLift(np.stack([np.clip(folded_a, 0.0, PI), out_b], axis=-1), curve.closed)


def _wrap(b):
    """Reduce to ``(-pi, pi]``."""
    return (b + PI) % TWO_PI - PI if ((b + PI) % TWO_PI) != 0 else PI


# ---------------------------------------------------------------------------
# distances between curve sets


def hausdorff(curves_a: Sequence[Polyline], curves_b: Sequence[Polyline], spacing: float = 0.002) -> float:
    """Symmetric Hausdorff distance in the quotient metric between two curve
    sets, measured on densely resampled vertices."""
    A = _dense_samples(curves_a, spacing)
    B = _dense_samples(curves_b, spacing)
    if len(A) == 0 or len(B) == 0:
        return math.inf if (len(A) or len(B)) else 0.0
    dab = cKDTree(images(B)).query(A)[0].max()
    dba = cKDTree(images(A)).query(B)[0].max()
    return float(max(dab, dba))


def distance_to_curves(p, curves: Sequence[Polyline], spacing: float = 0.002) -> float:
    S = _dense_samples(curves, spacing)
    if len(S) == 0:
        return math.inf
    return float(cKDTree(images(S)).query(canonical_array(p)[0])[0])


# ---------------------------------------------------------------------------
# CSV


def write_polylines_csv(path, curves: Sequence[Polyline]) -> None:
    """CSV with columns ``curve, alpha, beta`` (canonical coordinates)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["curve", "alpha", "beta"])
        for k, c in enumerate(curves):
            for a, b in c.canonical:
                w.writerow([k, repr(float(a)), repr(float(b))])


def read_polylines_csv(path) -> list:
    """Read curves from a CSV with ``alpha, beta`` columns and an optional
    ``curve`` id column; a curve whose last point repeats its first is closed."""
    groups: dict = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = row.get("curve", "0")
            groups.setdefault(key, []).append((float(row["alpha"]), float(row["beta"])))
    out = []
    for pts in groups.values():
        closed = len(pts) > 2 and quotient_distance(pts[0], pts[-1]) < 1e-9
        out.append(Polyline.from_points(pts, closed=closed))
    return out
