"""Independent oracles shared by the module tests and the acceptance suite."""

import math

import numpy as np
from scipy import ndimage

PI = math.pi


def fold(xy):
    """Canonical representative in [0, pi] x [0, 2pi), written out directly."""
    xy = np.atleast_2d(np.asarray(xy, dtype=float))
    a = np.mod(xy[:, 0], 2 * PI)
    b = np.mod(xy[:, 1], 2 * PI)
    flip = a > PI
    a = np.where(flip, 2 * PI - a, a)
    b = np.where(flip, np.mod(-b, 2 * PI), b)
    return np.stack([a, b], -1)


def quotient_gap(p, q):
    """Distance in the quotient by brute force over the 18 images of q."""
    p = np.asarray(p, dtype=float)
    best = math.inf
    for s in (1.0, -1.0):
        for m in (-1, 0, 1):
            for n in (-1, 0, 1):
                img = s * np.asarray(q, dtype=float) + 2 * PI * np.array([m, n])
                best = min(best, float(np.hypot(*(p - img))))
    return best


def dense(coords, spacing):
    coords = np.asarray(coords, dtype=float)
    out = [coords[:1]]
    for p, q in zip(coords[:-1], coords[1:]):
        k = max(1, int(math.ceil(np.hypot(*(q - p)) / spacing)))
        out.append(p + (np.arange(1, k + 1)[:, None] / k) * (q - p))
    return np.vstack(out)


def raster(coords, cell, spacing):
    nx, ny = int(math.ceil(PI / cell)) + 1, int(math.ceil(2 * PI / cell)) + 1
    grid = np.zeros((nx, ny), dtype=bool)
    pts = fold(dense(coords, spacing))
    i = np.clip((pts[:, 0] / cell).astype(int), 0, nx - 1)
    j = np.clip((pts[:, 1] / cell).astype(int), 0, ny - 1)
    grid[i, j] = True
    return grid


def grid_intersections(coords1, coords2, cell=0.002, merge=4):
    """Clusters of grid cells hit by both curves, as arrays of cell centres.
    Cells less than ``2 merge`` cells apart share a cluster, which joins the
    fragments left by curves meeting at a small angle."""
    both = raster(coords1, cell, cell / 4) & raster(coords2, cell, cell / 4)
    grown = ndimage.binary_dilation(both, structure=np.ones((3, 3)), iterations=merge)
    lab, n = ndimage.label(grown, structure=np.ones((3, 3)))
    lab = np.where(both, lab, 0)
    return [(np.argwhere(lab == k) + 0.5) * cell for k in range(1, n + 1) if np.any(lab == k)]


def sigma_coords(coords):
    c = np.asarray(coords, dtype=float)
    return np.stack([c[:, 0], 2 * PI - 4 * c[:, 0] - c[:, 1]], -1)


def match_sets(found, clusters, tol, exclude=()):
    """Worst distance between the found points and the oracle cluster centres.
    Clusters reaching within ``tol`` of an ``exclude`` point are dropped, as
    are found points there."""
    def near_excluded(cells):
        return any(min(quotient_gap(c, e) for c in cells[:: max(1, len(cells) // 200)]) <= tol for e in exclude)

    centres = [cl.mean(axis=0) for cl in clusters if not near_excluded(cl)]
    found = [f for f in found if all(quotient_gap(f, e) > tol for e in exclude)]
    worst = 0.0
    for f in found:
        worst = max(worst, min((quotient_gap(f, o) for o in centres), default=math.inf))
    for o in centres:
        worst = max(worst, min((quotient_gap(o, f) for f in found), default=math.inf))
    return worst, worst <= tol


FORBIDDEN_POINTS = ((0.0, 0.0), (PI / 2, 0.0), (PI, 0.0))


def quotient_gap_array(P, Q):
    """Row-wise quotient distance between point arrays, over the 18 images."""
    P = np.mod(np.asarray(P, dtype=float), 2 * PI)
    Q = np.mod(np.asarray(Q, dtype=float), 2 * PI)
    best = np.full(len(P), np.inf)
    for s in (1.0, -1.0):
        for m in (-1, 0, 1):
            for n in (-1, 0, 1):
                img = s * Q + 2 * PI * np.array([m, n])
                best = np.minimum(best, np.hypot(*(P - img).T))
    return best


def bareiss_det(M):
    """Fraction-free integer determinant."""
    A = [list(map(int, row)) for row in M]
    n = len(A)
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if A[r][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1] if n else 1


def invariant_factors_by_minors(M):
    """Invariant factors from determinantal divisors (gcd of k x k minors)."""
    from itertools import combinations

    m, n = len(M), len(M[0])
    ds = [1]
    for k in range(1, min(m, n) + 1):
        g = 0
        for rows in combinations(range(m), k):
            for cols in combinations(range(n), k):
                g = math.gcd(g, bareiss_det([[M[r][c] for c in cols] for r in rows]))
        if g == 0:
            break
        ds.append(g)
    factors = [ds[k] // ds[k - 1] for k in range(1, len(ds))]
    return factors + [0] * (min(m, n) - len(factors))


def raw_mul(p, q):
    w1, x1, y1, z1 = p
    w2, x2, y2, z2 = q
    return (w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2)


def raw_word(word, values):
    """Evaluate a word (1-based signed letters) on tuples of floats."""
    out = (1.0, 0.0, 0.0, 0.0)
    for letter in word:
        w, x, y, z = values[abs(letter) - 1]
        out = raw_mul(out, (w, x, y, z) if letter > 0 else (w, -x, -y, -z))
    return out


def raw_dist(p, q):
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(p, q)))
