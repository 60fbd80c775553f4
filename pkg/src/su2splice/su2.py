"""SU(2) as the group of unit quaternions.

Two layers live here.  The array layer (``qmul``, ``qinv``, ``qexp`` ...)
works on numpy arrays whose last axis has length 4, ordered ``(w, x, y, z)``;
everything numerically heavy in the package goes through it.  The value layer
is :class:`UnitQuaternion`, an immutable wrapper used at API boundaries.

The distinguished maximal torus is the circle ``cos t + i sin t``.  A diagonal
matrix ``diag(e^{it}, e^{-it})`` corresponds to that quaternion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonCommutingPair

TWO_PI = 2.0 * math.pi
ALGEBRA_TOL = 1e-12
SOLVER_TOL = 1e-9


# ---------------------------------------------------------------------------
# array layer


def qmul(a, b):
    """Hamilton product, broadcasting over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def qinv(a):
    """Inverse of a unit quaternion (its conjugate)."""
    a = np.asarray(a, dtype=float)
    return a * np.array([1.0, -1.0, -1.0, -1.0])


def qnormalize(a):
    a = np.asarray(a, dtype=float)
    return a / np.linalg.norm(a, axis=-1, keepdims=True)


def qexp(v):
    """Exponential of a pure quaternion given as a 3-vector (batched)."""
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v, axis=-1, keepdims=True)
    # sin(t)/t, stable at 0
    sinc = np.where(theta > 1e-8, np.sin(theta) / np.where(theta > 0, theta, 1.0), 1.0 - theta**2 / 6.0)
    return np.concatenate([np.cos(theta), sinc * v], axis=-1)


def qcircle(t):
    """``cos t + i sin t`` for an array of angles."""
    t = np.asarray(t, dtype=float)
    z = np.zeros_like(t)
    return np.stack([np.cos(t), np.sin(t), z, z], axis=-1)


def qconjugate_by(g, q):
    """``g q g^{-1}``."""
    return qmul(qmul(g, q), qinv(g))


def random_su2(rng, size=None):
    """Haar-random unit quaternions."""
    shape = (4,) if size is None else tuple(np.atleast_1d(size).tolist()) + (4,)
    return qnormalize(rng.standard_normal(shape))


def commutator_defect_array(a, b):
    """``|ab - ba|`` for batches; equals ``2 |vec(a) x vec(b)|``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return 2.0 * np.linalg.norm(np.cross(a[..., 1:], b[..., 1:]), axis=-1)


def canonical_angles(alpha, beta, edge_tol=SOLVER_TOL):
    """Canonical representative of ``(alpha, beta)`` under the pillowcase
    relations, vectorized.

    Returns ``alpha`` in ``[0, pi]`` and ``beta`` in ``[0, 2pi)``; on the edges
    ``alpha in {0, pi}`` (within ``edge_tol``) alpha is snapped and beta is
    folded into ``[0, pi]``.
    """
    a = np.mod(np.asarray(alpha, dtype=float), TWO_PI)
    b = np.mod(np.asarray(beta, dtype=float), TWO_PI)
    flip = a > math.pi
    a = np.where(flip, TWO_PI - a, a)
    b = np.where(flip, np.mod(TWO_PI - b, TWO_PI), b)
    near0 = a < edge_tol
    nearpi = np.abs(a - math.pi) < edge_tol
    a = np.where(near0, 0.0, np.where(nearpi, math.pi, a))
    edge = near0 | nearpi
    b = np.where(edge & (b > math.pi), TWO_PI - b, b)
    b = np.where(TWO_PI - b < ALGEBRA_TOL, 0.0, b)
    return a, b


def _rotation_to_i(u):
    """Unit quaternion ``g`` with ``g u g^{-1} = i`` for unit vectors ``u``
    (batched, shape (..., 3))."""
    u = np.asarray(u, dtype=float)
    e = np.zeros_like(u)
    e[..., 0] = 1.0
    d = u[..., 0]
    cr = np.cross(u, e)
    g = np.concatenate([(1.0 + d)[..., None], cr], axis=-1)
    anti = d < -1.0 + 1e-12
    g[anti] = np.array([0.0, 0.0, 1.0, 0.0])
    return qnormalize(g)


def pillow_coords_array(q1, q2, edge_tol=SOLVER_TOL):
    """Canonical pillowcase angles for batches of commuting pairs.

    The commutation is not checked; for a non-commuting pair the result is the
    diagonalization along the axis of the less central element.
    """
    q1 = np.atleast_2d(np.asarray(q1, dtype=float))
    q2 = np.atleast_2d(np.asarray(q2, dtype=float))
    v1, v2 = q1[..., 1:], q2[..., 1:]
    n1 = np.linalg.norm(v1, axis=-1)
    n2 = np.linalg.norm(v2, axis=-1)
    use1 = n1 >= n2
    ref = np.where(use1[..., None], v1, v2)
    nref = np.where(use1, n1, n2)
    u = np.where(nref[..., None] > 0, ref / np.where(nref > 0, nref, 1.0)[..., None], np.array([1.0, 0.0, 0.0]))
    s1 = np.sum(v1 * u, axis=-1)
    s2 = np.sum(v2 * u, axis=-1)
    a = np.arctan2(s1, q1[..., 0])
    b = np.arctan2(s2, q2[..., 0])
    return canonical_angles(a, b, edge_tol)


# ---------------------------------------------------------------------------
# value layer


@dataclass(frozen=True)
class UnitQuaternion:
    """An element of SU(2).  Components are renormalized on construction."""

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        n = math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)
        if n == 0.0:
            raise ValueError("zero quaternion is not in SU(2)")
        for name in "wxyz":
            object.__setattr__(self, name, float(getattr(self, name)) / n)

    @classmethod
    def from_array(cls, a) -> "UnitQuaternion":
        a = np.asarray(a, dtype=float).reshape(4)
        return cls(*a)

    @classmethod
    def identity(cls) -> "UnitQuaternion":
        return cls(1.0, 0.0, 0.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def as_tuple(self):
        return (self.w, self.x, self.y, self.z)

    def __mul__(self, other: "UnitQuaternion") -> "UnitQuaternion":
        return UnitQuaternion.from_array(qmul(self.as_array(), other.as_array()))

    def __neg__(self) -> "UnitQuaternion":
        return UnitQuaternion(-self.w, -self.x, -self.y, -self.z)

    def inverse(self) -> "UnitQuaternion":
        return UnitQuaternion(self.w, -self.x, -self.y, -self.z)

    def conjugate_by(self, g: "UnitQuaternion") -> "UnitQuaternion":
        """``g self g^{-1}``."""
        return g * self * g.inverse()

    def __pow__(self, n: int) -> "UnitQuaternion":
        out = UnitQuaternion.identity()
        base = self if n >= 0 else self.inverse()
        for _ in range(abs(n)):
            out = out * base
        return out

    @property
    def half_trace(self) -> float:
        return min(1.0, max(-1.0, self.w))

    def distance(self, other: "UnitQuaternion") -> float:
        return float(np.linalg.norm(self.as_array() - other.as_array()))

    def is_central(self, tol: float = ALGEBRA_TOL) -> bool:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2) < tol

    def on_circle(self, tol: float = ALGEBRA_TOL) -> bool:
        """True if the element lies on the distinguished circle ``e^{it}``."""
        return math.hypot(self.y, self.z) < tol

    def circle_angle(self) -> float:
        """Angle ``t`` with ``self = e^{it}`` when on the circle, in ``[0, 2pi)``."""
        return math.atan2(self.x, self.w) % TWO_PI

    def __repr__(self):
        return f"UnitQuaternion({self.w:.12g}, {self.x:.12g}, {self.y:.12g}, {self.z:.12g})"


IDENTITY = UnitQuaternion(1.0, 0.0, 0.0, 0.0)
QI = UnitQuaternion(0.0, 1.0, 0.0, 0.0)
QJ = UnitQuaternion(0.0, 0.0, 1.0, 0.0)
QK = UnitQuaternion(0.0, 0.0, 0.0, 1.0)


def from_circle(angle: float) -> UnitQuaternion:
    """``e^{i angle}`` on the distinguished maximal torus."""
    return UnitQuaternion(math.cos(angle), math.sin(angle), 0.0, 0.0)


def commutator_defect(q1: UnitQuaternion, q2: UnitQuaternion) -> float:
    """Norm of ``q1 q2 - q2 q1``; zero exactly when the pair commutes."""
    return float(commutator_defect_array(q1.as_array(), q2.as_array()))


@dataclass(frozen=True)
class DiagonalPairResult:
    alpha: float
    beta: float
    conjugator: UnitQuaternion
    residual: float

    @property
    def point(self):
        return (self.alpha, self.beta)


def simultaneous_diagonalize(
    q1: UnitQuaternion, q2: UnitQuaternion, tol: float = SOLVER_TOL, edge_tol: float = SOLVER_TOL
) -> DiagonalPairResult:
    """Conjugate a commuting pair onto the circle ``e^{it}``.

    Returns the canonical pillowcase angles and a conjugator ``g`` with
    ``g q1 g^{-1} = e^{i alpha}`` and ``g q2 g^{-1} = e^{i beta}``.
    """
    defect = commutator_defect(q1, q2)
    if not defect < tol:
        raise NonCommutingPair(f"commutator defect {defect:.3e} exceeds tolerance {tol:.1e}")
    a1, a2 = q1.as_array(), q2.as_array()
    n1, n2 = np.linalg.norm(a1[1:]), np.linalg.norm(a2[1:])
    ref = a1[1:] if n1 >= n2 else a2[1:]
    nref = max(n1, n2)
    if nref < ALGEBRA_TOL:
        g = IDENTITY
    else:
        g = UnitQuaternion.from_array(_rotation_to_i(ref / nref))
    d1 = q1.conjugate_by(g)
    d2 = q2.conjugate_by(g)
    raw_a = math.atan2(d1.x, d1.w)
    raw_b = math.atan2(d2.x, d2.w)
    alpha, beta = canonical_angles(raw_a, raw_b, edge_tol)
    alpha, beta = float(alpha), float(beta)
    # conjugation by j realises (a, b) -> (-a, -b); pick whichever of g, jg
    # lands on the canonical angles
    best = None
    for h in (g, QJ * g):
        e1 = q1.conjugate_by(h).distance(from_circle(alpha))
        e2 = q2.conjugate_by(h).distance(from_circle(beta))
        r = max(e1, e2)
        if best is None or r < best[1]:
            best = (h, r)
    h, residual = best
    if residual > 10 * tol:
        raise NonCommutingPair(f"diagonalization residual {residual:.3e} exceeds {10 * tol:.1e}")
    return DiagonalPairResult(alpha, beta, h, residual)
