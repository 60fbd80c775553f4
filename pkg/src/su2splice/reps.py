"""Numerical solving of ``Hom(G, SU(2))`` on a conjugacy slice.

Unknowns are generator images ``Q`` of shape ``(n, 4)`` (batched as
``(B, n, 4)``).  Updates are right perturbations ``q_k -> q_k exp(d_k)`` with
``d_k`` a 3-vector, so the Jacobian of a word with respect to ``d`` is built
from prefix/suffix products.  The slice puts generator 1 on the circle
``e^{it}`` and generator 2 in the ``i, j`` plane, which leaves a discrete
residual symmetry fixed by :func:`gauge_fix`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .groups import FPGroup, RepAssignment, max_commutator_defect_array, peripheral_images
from .su2 import SOLVER_TOL, _rotation_to_i, pillow_coords_array, qexp, qinv, qmul

ONE = np.array([1.0, 0.0, 0.0, 0.0])
MINUS_ONE = np.array([-1.0, 0.0, 0.0, 0.0])


def left_matrix(q):
    """``L(q)`` with ``L(q) p = q p`` (batched, shape (..., 4, 4))."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    M = np.empty(q.shape[:-1] + (4, 4))
    M[..., 0, 0], M[..., 0, 1], M[..., 0, 2], M[..., 0, 3] = w, -x, -y, -z
    M[..., 1, 0], M[..., 1, 1], M[..., 1, 2], M[..., 1, 3] = x, w, -z, y
    M[..., 2, 0], M[..., 2, 1], M[..., 2, 2], M[..., 2, 3] = y, z, w, -x
    M[..., 3, 0], M[..., 3, 1], M[..., 3, 2], M[..., 3, 3] = z, -y, x, w
    return M


def right_matrix(q):
    """``R(q)`` with ``R(q) p = p q``."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    M = np.empty(q.shape[:-1] + (4, 4))
    M[..., 0, 0], M[..., 0, 1], M[..., 0, 2], M[..., 0, 3] = w, -x, -y, -z
    M[..., 1, 0], M[..., 1, 1], M[..., 1, 2], M[..., 1, 3] = x, w, z, -y
    M[..., 2, 0], M[..., 2, 1], M[..., 2, 2], M[..., 2, 3] = y, -z, w, x
    M[..., 3, 0], M[..., 3, 1], M[..., 3, 2], M[..., 3, 3] = z, y, -x, w
    return M


# Component-tuple quaternion helpers; they work on plain floats and on
# contiguous 1-d arrays alike.


def _pm(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw)


def _pinv(a):
    return (a[0], -a[1], -a[2], -a[3])


def _times_unit(a, i):
    """``a i``, ``a j`` or ``a k`` for ``i = 0, 1, 2``."""
    w, x, y, z = a
    if i == 0:
        return (-x, w, z, -y)
    if i == 1:
        return (-y, -z, w, x)
    return (-z, y, -x, w)


_ONE_T = (1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Equation:
    """``rho(word) = target``."""

    word: tuple
    target: tuple = (1.0, 0.0, 0.0, 0.0)


class System:
    """Word equations plus the slice conditions, with analytic Jacobian."""

    def __init__(self, n_generators: int, equations: Sequence[Equation], gauge: bool = True):
        self.n = n_generators
        self.equations = list(equations)
        self.gauge = gauge
        self._words = [
            (np.array([abs(x) - 1 for x in e.word], dtype=int), np.array([x > 0 for x in e.word], dtype=bool),
             np.asarray(e.target, dtype=float))
            for e in self.equations
        ]

    @classmethod
    def for_group(cls, group: FPGroup, extra: Sequence[Equation] = (), gauge: bool = True) -> "System":
        eqs = [Equation(r) for r in group.relators] + list(extra)
        return cls(group.n_generators, eqs, gauge)

    @property
    def n_gauge(self) -> int:
        if not self.gauge:
            return 0
        return 2 if self.n == 1 else 3

    @property
    def n_rows(self) -> int:
        return 4 * len(self.equations) + self.n_gauge

    def residual(self, Q) -> np.ndarray:
        Q = np.asarray(Q, dtype=float)
        B = Q.shape[0]
        out = np.empty((B, self.n_rows))
        for e, (idx, pos, target) in enumerate(self._words):
            P = np.tile(ONE, (B, 1))
            for k, s in zip(idx, pos):
                q = Q[:, k]
                P = qmul(P, q if s else qinv(q))
            out[:, 4 * e: 4 * e + 4] = P - target
        if self.gauge:
            g = 4 * len(self.equations)
            out[:, g] = Q[:, 0, 2]
            out[:, g + 1] = Q[:, 0, 3]
            if self.n > 1:
                out[:, g + 2] = Q[:, 1, 3]
        return out

    def residual_and_jacobian(self, Q):
        """``(F, J)`` with ``J`` the derivative along right perturbations
        ``q_k exp(d_k)``.  Column ``i`` of a letter's block is ``P e_i S``
        for the prefix ``P`` and suffix ``S`` around the letter."""
        Q = np.asarray(Q, dtype=float)
        B = Q.shape[0]
        if B == 1:
            # plain floats beat numpy for a single point
            gens = [tuple(q) for q in Q[0].tolist()]
            one = _ONE_T
        else:
            gens = [tuple(np.ascontiguousarray(Q[:, k, c]) for c in range(4)) for k in range(self.n)]
            one = (np.ones(B), np.zeros(B), np.zeros(B), np.zeros(B))
        F = np.empty((B, self.n_rows))
        J = np.zeros((B, self.n_rows, 3 * self.n))
        for e, (idx, pos, target) in enumerate(self._words):
            letters = list(zip(idx.tolist(), pos.tolist()))
            facs = [gens[k] if s else _pinv(gens[k]) for k, s in letters]
            L = len(facs)
            pre = [one]
            for f in facs:
                pre.append(_pm(pre[-1], f))
            suf = [one] * (L + 1)
            for p in range(L - 1, -1, -1):
                suf[p] = _pm(facs[p], suf[p + 1])
            for c in range(4):
                F[:, 4 * e + c] = pre[L][c] - target[c]
            for p, (k, s) in enumerate(letters):
                a, b, sg = (pre[p + 1], suf[p + 1], 1.0) if s else (pre[p], suf[p], -1.0)
                for i in range(3):
                    col = _pm(_times_unit(a, i), b)
                    for c in range(4):
                        J[:, 4 * e + c, 3 * k + i] += sg * col[c]
        if self.gauge:
            g = 4 * len(self.equations)
            q1 = gens[0]
            F[:, g], F[:, g + 1] = q1[2], q1[3]
            for i in range(3):
                c = _times_unit(q1, i)
                J[:, g, i], J[:, g + 1, i] = c[2], c[3]
            if self.n > 1:
                q2 = gens[1]
                F[:, g + 2] = q2[3]
                for i in range(3):
                    J[:, g + 2, 3 + i] = _times_unit(q2, i)[3]
        return F, J

    def equation_residuals(self, Q) -> np.ndarray:
        """``max_e |rho(word_e) - target_e|`` (gauge rows excluded)."""
        F = self.residual(Q)
        m = len(self.equations)
        if m == 0:
            return np.zeros(F.shape[0])
        return np.linalg.norm(F[:, : 4 * m].reshape(-1, m, 4), axis=-1).max(axis=-1)


def apply_step(Q, delta):
    """``q_k exp(d_k)`` for each generator (batched)."""
    Q = np.asarray(Q, dtype=float)
    d = np.asarray(delta, dtype=float).reshape(Q.shape[0], Q.shape[1], 3)
    out = qmul(Q, qexp(d))
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def levenberg_marquardt(system: System, Q0, tol: float = 1e-13, max_iter: int = 100):
    """Batched damped Gauss-Newton.  Returns ``(Q, residual_norms)`` where
    the residual is the max over equations of ``|rho(w) - target|``."""
    Q = np.array(Q0, dtype=float)
    B = Q.shape[0]
    nv = 3 * system.n
    mu = np.full(B, 1e-3)
    F, J = system.residual_and_jacobian(Q)
    cost = np.einsum("bi,bi->b", F, F)
    active = np.ones(B, dtype=bool)
    eye = np.eye(nv)
    for _ in range(max_iter):
        active &= np.abs(F).max(axis=1) > tol
        if not active.any():
            break
        a = np.nonzero(active)[0]
        Ja, Fa = J[a], F[a]
        JT = np.swapaxes(Ja, 1, 2)
        A = JT @ Ja
        scale = np.maximum(np.trace(A, axis1=1, axis2=2) / nv, 1e-30)
        A = A + (mu[a] * scale)[:, None, None] * eye
        g = (JT @ Fa[:, :, None])[:, :, 0]
        step = -np.linalg.solve(A, g[:, :, None])[:, :, 0]
        Qn = apply_step(Q[a], step)
        Fn, Jn = system.residual_and_jacobian(Qn)
        cn = np.einsum("bi,bi->b", Fn, Fn)
        good = cn < cost[a]
        ga = a[good]
        Q[ga], F[ga], J[ga], cost[ga] = Qn[good], Fn[good], Jn[good], cn[good]
        mu[ga] = np.maximum(mu[ga] / 5.0, 1e-15)
        bad = a[~good]
        mu[bad] *= 8.0
        active[bad[mu[bad] > 1e12]] = False
    return Q, system.equation_residuals(Q)


def gauss_newton_min_norm(system: System, Q, tol: float = 1e-13, max_iter: int = 20, extra_rows=None,
                          rank: int | None = None):
    """Single-point Gauss-Newton with minimum-norm least squares steps.

    ``extra_rows`` is an optional ``(a, b)`` pair appending the linear
    condition ``a . d_total = b`` (pseudo-arclength hyperplane).

    ``rank`` truncates each step to the leading singular directions.  Knot
    group relators are not transverse: at irreducible solutions their
    differential loses a rank, and off the solution set the missing direction
    reappears with a singular value proportional to the distance, which an
    untruncated step would amplify.
    """
    Q = np.array(Q, dtype=float)[None]
    total = np.zeros(3 * system.n)
    for _ in range(max_iter):
        F, J = system.residual_and_jacobian(Q)
        F, J = F[0], J[0]
        if extra_rows is not None:
            a, b = extra_rows
            F = np.append(F, a @ total - b)
            J = np.vstack([J, a[None]])
        if np.abs(F).max() < tol:
            break
        if rank is None:
            d = np.linalg.lstsq(J, -F, rcond=None)[0]
        else:
            u, sv, vt = np.linalg.svd(J, full_matrices=False)
            r = min(rank, int(np.sum(sv > 1e-12 * sv[0])))
            d = -(vt[:r].T @ ((u[:, :r].T @ F) / sv[:r]))
        total += d
        Q = apply_step(Q, d)
        if not np.all(np.isfinite(Q)):
            break
    return Q[0], float(system.equation_residuals(Q)[0])


def gauge_fix(Q) -> np.ndarray:
    """Conjugate batched images into the canonical slice: generator 1 on
    ``cos t + i sin t`` with ``sin t >= 0``, generator 2 with zero ``k`` part
    and nonnegative ``j`` part.  Central first generators fall back on the
    second generator's axis."""
    Q = np.array(Q, dtype=float)
    B, n, _ = Q.shape
    v1 = Q[:, 0, 1:]
    n1 = np.linalg.norm(v1, axis=1)
    ref = v1.copy()
    use2 = n1 < 1e-12
    if n > 1:
        ref[use2] = Q[use2, 1, 1:]
    nr = np.linalg.norm(ref, axis=1)
    u = np.where(nr[:, None] > 1e-14, ref / np.where(nr > 1e-14, nr, 1.0)[:, None], np.array([1.0, 0, 0]))
    g = _rotation_to_i(u)
    Q = qmul(qmul(g[:, None, :], Q), qinv(g)[:, None, :])
    if n > 1:
        # rotate about the i axis so generator 2 (or 3 if 2 is on the axis) has k = 0, j >= 0
        y, z = Q[:, 1, 2], Q[:, 1, 3]
        if n > 2:
            on_axis = np.hypot(y, z) < 1e-12
            y = np.where(on_axis, Q[:, 2, 2], y)
            z = np.where(on_axis, Q[:, 2, 3], z)
        phi = np.arctan2(z, y)
        h = np.stack([np.cos(-phi / 2), np.sin(-phi / 2), np.zeros(B), np.zeros(B)], -1)
        Q = qmul(qmul(h[:, None, :], Q), qinv(h)[:, None, :])
    return Q / np.linalg.norm(Q, axis=-1, keepdims=True)


def slice_from_angles(a, b, c) -> np.ndarray:
    """Two-generator slice points from angles: ``g1 = e^{ia}``,
    ``g2 = cos b + sin b (cos c i + sin c j)``."""
    a, b, c = (np.asarray(t, dtype=float) for t in (a, b, c))
    z = np.zeros_like(a)
    g1 = np.stack([np.cos(a), np.sin(a), z, z], -1)
    g2 = np.stack([np.cos(b), np.sin(b) * np.cos(c), np.sin(b) * np.sin(c), z], -1)
    return np.stack([g1, g2], axis=-2)


def seeds(group: FPGroup, grid: int, seed: int = 0) -> np.ndarray:
    n = group.n_generators
    if n > 3:
        raise ValueError("the slice solver handles at most three generators")
    rng = np.random.default_rng(seed)
    if n == 1:
        t = (np.arange(grid) + 0.5) * math.pi / grid
        return np.stack([np.cos(t), np.sin(t), 0 * t, 0 * t], -1)[:, None, :]
    ticks = (np.arange(grid) + 0.5) * math.pi / grid
    A, Bv, C = np.meshgrid(ticks, ticks, ticks, indexing="ij")
    base = slice_from_angles(A.ravel(), Bv.ravel(), C.ravel())
    if n == 2:
        return base
    g3 = rng.standard_normal((base.shape[0], 4))
    g3 /= np.linalg.norm(g3, axis=1, keepdims=True)
    return np.concatenate([base, g3[:, None, :]], axis=1)


def pillow_of(group: FPGroup, Q) -> np.ndarray:
    """Canonical pillowcase coordinates of batched solutions, shape (B, 2)."""
    m, l = peripheral_images(group, Q)
    a, b = pillow_coords_array(m, l)
    return np.stack([np.atleast_1d(a), np.atleast_1d(b)], -1)


def solve_representations(group: FPGroup, grid: int = 10, refine_tol: float = SOLVER_TOL,
                          seed: int = 0, max_iter: int = 150) -> list:
    """Grid-seeded solutions on the slice, refined and deduplicated."""
    system = System.for_group(group)
    Q0 = seeds(group, grid, seed)
    Q, res = levenberg_marquardt(system, Q0, max_iter=max_iter)
    ok = res < refine_tol
    if not ok.any():
        return []
    Q = gauge_fix(Q[ok])
    if group.has_peripheral:
        pc = pillow_of(group, Q)
    else:
        pc = np.zeros((len(Q), 2))
    feats = np.concatenate([pc, Q[:, :, 0]], axis=1)
    keys = np.round(feats / 1e-5).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    out = []
    for k in sorted(first, key=lambda i: tuple(keys[i])):
        out.append(RepAssignment.from_array(group, Q[k], alpha=float(pc[k, 0]), beta=float(pc[k, 1])))
    return out


def cluster_features(points: np.ndarray, radius: float) -> np.ndarray:
    """Connected-component labels of points under the ``radius`` graph."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    if len(points) == 0:
        return np.zeros(0, dtype=int)
    pairs = cKDTree(points).query_pairs(radius, output_type="ndarray")
    n = len(points)
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)) if len(pairs) else coo_matrix((n, n))
    return connected_components(g, directed=False)[1]


def is_abelian_array(Q, tol: float = 1e-7) -> np.ndarray:
    return max_commutator_defect_array(Q) < tol
