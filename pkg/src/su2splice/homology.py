"""Exact integer homology: Smith normal form, cokernels, slopes, Dehn
fillings, splices, and the normalization of order-4 gluing matrices.

All arithmetic uses Python integers, so nothing overflows.  A presentation
matrix has one row per generator and one column per relation; its cokernel is
``Z^rows / column span``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import NotNormalizable, WrongDeterminant

Matrix = list  # list of rows of Python ints


def as_matrix(M) -> Matrix:
    rows = [[int(x) for x in row] for row in M]
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("ragged matrix")
    return rows


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(A: Matrix, B: Matrix) -> Matrix:
    if not A:
        return []
    if not B:
        return [[] for _ in A]
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def det(M: Matrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    A = [list(r) for r in as_matrix(M)]
    n = len(A)
    if n == 0:
        return 1
    if any(len(r) != n for r in A):
        raise ValueError("determinant of a non-square matrix")
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass(frozen=True)
class SNFResult:
    """``U M V = S`` with ``U, V`` unimodular and ``S`` diagonal, ``d1 | d2 | ...``."""

    U: Matrix
    S: Matrix
    V: Matrix
    invariant_factors: tuple

    @property
    def rank(self) -> int:
        return sum(1 for d in self.invariant_factors if d != 0)


def smith_normal_form(M) -> SNFResult:
    A = as_matrix(M)
    m = len(A)
    n = len(A[0]) if m else 0
    U = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for R in (A, V):
            for row in R:
                row[i], row[j] = row[j], row[i]

    def add_row(src, dst, k):  # row dst += k * row src
        for R in (A, U):
            R[dst] = [x + k * y for x, y in zip(R[dst], R[src])]

    def add_col(src, dst, k):  # col dst += k * col src
        for R in (A, V):
            for row in R:
                row[dst] += k * row[src]

    for t in range(min(m, n)):
        while True:
            # smallest nonzero entry of the trailing block becomes the pivot
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    if A[i][j] != 0 and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            p = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                q = A[i][t] // p
                if q:
                    add_row(t, i, -q)
                if A[i][t]:
                    dirty = True
            for j in range(t + 1, n):
                q = A[t][j] // p
                if q:
                    add_col(t, j, -q)
                if A[t][j]:
                    dirty = True
            if dirty:
                continue
            # enforce divisibility of the remaining block
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(bad, t, 1)
        if A[t][t] < 0:
            U[t] = [-x for x in U[t]]
            A[t] = [-x for x in A[t]]
    factors = tuple(A[i][i] for i in range(min(m, n)))
    return SNFResult(U, A, V, factors)


def cokernel(M) -> list:
    """Invariant factors of ``Z^rows / image(M)``: nontrivial torsion factors in
    divisibility order followed by one ``0`` per free summand."""
    A = as_matrix(M)
    m = len(A)
    if m == 0:
        return []
    n = len(A[0])
    if n == 0:
        return [0] * m
    d = list(smith_normal_form(A).invariant_factors) + [0] * (m - min(m, n))
    torsion = [x for x in d if x not in (0, 1)]
    free = [0 for x in d if x == 0]
    return torsion + free


def group_order(factors: Sequence[int]) -> int:
    """Order of the group; 0 when infinite."""
    if any(f == 0 for f in factors):
        return 0
    return math.prod(factors)


def format_group(factors: Sequence[int]) -> str:
    if not factors:
        return "0"
    return " + ".join("Z" if f == 0 else f"Z/{f}" for f in factors)


def seifert_presentation(orders: Sequence[int], betas: Sequence[int]) -> Matrix:
    """Presentation of ``H_1`` of a Seifert fibered homology class with
    exceptional fibers of the given orders: ``diag(orders)`` bordered by the
    ``betas`` column and a row of ones."""
    k = len(orders)
    if len(betas) != k:
        raise ValueError("orders and betas differ in length")
    rows = [[orders[i] if j == i else 0 for j in range(k)] + [betas[i]] for i in range(k)]
    rows.append([1] * k + [0])
    return rows


# ---------------------------------------------------------------------------
# slopes and gluing matrices


@dataclass(frozen=True)
class SlopeClass:
    """Slope ``mu^r lambda^s``, stored with ``r > 0`` or ``(r, s) = (0, 1)``."""

    r: int
    s: int

    def __post_init__(self):
        r, s = int(self.r), int(self.s)
        if math.gcd(r, s) != 1:
            raise ValueError(f"slope ({r},{s}) is not primitive")
        if r < 0 or (r == 0 and s < 0):
            r, s = -r, -s
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "s", s)

    def __str__(self):
        return f"{self.r}/{self.s}"

    @classmethod
    def parse(cls, text: str) -> "SlopeClass":
        if "/" in text:
            r, s = text.split("/")
            return cls(int(r), int(s))
        return cls(int(text), 1)


def slope_distance(s1: SlopeClass, s2: SlopeClass) -> int:
    return abs(s1.r * s2.s - s2.r * s1.s)


@dataclass(frozen=True)
class GluingMatrix:
    """``mu1 ~ mu2^a lambda2^b``, ``lambda1 ~ mu2^c lambda2^d``."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for k in "abcd":
            object.__setattr__(self, k, int(getattr(self, k)))
        if abs(self.det) != 1:
            raise WrongDeterminant(f"gluing matrix {self.entries} has determinant {self.det}")

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    @property
    def matrix(self) -> Matrix:
        return [[self.a, self.b], [self.c, self.d]]

    @classmethod
    def from_matrix(cls, M) -> "GluingMatrix":
        return cls(M[0][0], M[0][1], M[1][0], M[1][1])

    @classmethod
    def parse(cls, text: str) -> "GluingMatrix":
        parts = [int(x) for x in text.replace(" ", "").split(",")]
        if len(parts) != 4:
            raise ValueError("gluing matrix needs four comma-separated integers")
        return cls(*parts)

    def __str__(self):
        return "({},{},{},{})".format(*self.entries)


NORMAL_FORM = GluingMatrix(1, 0, -4, -1)


# ---------------------------------------------------------------------------
# peripheral data, fillings and splices


@dataclass(frozen=True)
class PeripheralHomologyData:
    """``H_1(M) = (+) Z/ambient[i]`` with the images of ``mu`` and ``lambda``
    written in that basis (``0`` in ``ambient`` is a free summand)."""

    ambient: tuple
    mu_image: tuple
    lambda_image: tuple

    def __post_init__(self):
        for k in ("ambient", "mu_image", "lambda_image"):
            object.__setattr__(self, k, tuple(int(x) for x in getattr(self, k)))
        n = len(self.ambient)
        if len(self.mu_image) != n or len(self.lambda_image) != n:
            raise ValueError("peripheral images must match the ambient rank")

    @property
    def relations(self) -> Matrix:
        n = len(self.ambient)
        return [[self.ambient[i] if i == j else 0 for j in range(n)] for i in range(n)]

    @property
    def lambda_order(self) -> int:
        """Order of the image of lambda (0 if infinite)."""
        return element_order(self.ambient, self.lambda_image)

    def to_dict(self):
        return {"ambient": list(self.ambient), "mu": list(self.mu_image), "lambda": list(self.lambda_image)}

    @classmethod
    def from_dict(cls, d) -> "PeripheralHomologyData":
        return cls(d["ambient"], d["mu"], d["lambda"])

    def with_images(self, mu=None, lam=None) -> "PeripheralHomologyData":
        return PeripheralHomologyData(self.ambient, self.mu_image if mu is None else mu,
                                      self.lambda_image if lam is None else lam)


ZHS_KNOT = PeripheralHomologyData((0,), (1,), (0,))
# twisted I-bundle over the Klein bottle: H_1 = Z (a) + Z/2 (b), sigma = a^2, lambda = b
KLEIN_BUNDLE = PeripheralHomologyData((0, 2), (2, 0), (0, 1))
PRESETS = {"zhs-knot": ZHS_KNOT, "klein": KLEIN_BUNDLE}


def element_order(ambient: Sequence[int], v: Sequence[int]) -> int:
    """Order of ``v`` in ``(+) Z/ambient[i]`` (0 means infinite order)."""
    order = 1
    for e, x in zip(ambient, v):
        if e == 0:
            if x != 0:
                return 0
            continue
        if e == 1:
            continue
        order = math.lcm(order, e // math.gcd(e, x % e))
    return order


def _hstack(*blocks: Matrix) -> Matrix:
    rows = len(blocks[0])
    return [sum((b[i] for b in blocks), []) for i in range(rows)]


def filling_homology(data: PeripheralHomologyData, slope: SlopeClass) -> list:
    col = [[slope.r * m + slope.s * l] for m, l in zip(data.mu_image, data.lambda_image)]
    return cokernel(_hstack(data.relations, col))


def splice_presentation(g: GluingMatrix, side1: PeripheralHomologyData,
                        side2: PeripheralHomologyData) -> Matrix:
    n1, n2 = len(side1.ambient), len(side2.ambient)
    rows = n1 + n2
    cols = []
    for i in range(n1):
        c = [0] * rows
        c[i] = side1.ambient[i]
        cols.append(c)
    for i in range(n2):
        c = [0] * rows
        c[n1 + i] = side2.ambient[i]
        cols.append(c)
    m2, l2 = side2.mu_image, side2.lambda_image
    cols.append(list(side1.mu_image) + [-(g.a * x + g.b * y) for x, y in zip(m2, l2)])
    cols.append(list(side1.lambda_image) + [-(g.c * x + g.d * y) for x, y in zip(m2, l2)])
    return [list(r) for r in zip(*cols)]


def splice_homology(g: GluingMatrix, side1: PeripheralHomologyData, side2: PeripheralHomologyData) -> list:
    return cokernel(splice_presentation(g, side1, side2))


# ---------------------------------------------------------------------------
# gluing normalization


@dataclass(frozen=True)
class Move:
    """One re-coordinatization of a gluing.

    ``twist1(k)``: ``mu1 -> mu1 lambda1^k`` (side 1 becomes 1/k surgery on its knot);
    ``twist2(m)``: ``mu2 -> mu2 lambda2^m`` (same on side 2);
    ``reverse2``: reverse the orientation of the second knot;
    ``reverse_both``: reverse both ambient spheres, inverting both longitudes.
    """

    kind: str
    param: int = 0

    def __str__(self):
        return f"{self.kind}({self.param})" if self.kind in ("twist1", "twist2") else self.kind

    @property
    def left(self) -> Matrix:
        if self.kind == "twist1":
            return [[1, self.param], [0, 1]]
        if self.kind == "reverse_both":
            return [[1, 0], [0, -1]]
        return identity(2)

    @property
    def right(self) -> Matrix:
        if self.kind == "twist2":
            return [[1, -self.param], [0, 1]]
        if self.kind == "reverse2":
            return [[-1, 0], [0, -1]]
        if self.kind == "reverse_both":
            return [[1, 0], [0, -1]]
        return identity(2)

    @property
    def note(self) -> str:
        return {
            "twist1": f"side 1 sphere replaced by 1/{self.param} surgery on its knot",
            "twist2": f"side 2 sphere replaced by 1/{self.param} surgery on its knot",
            "reverse2": "orientation of knot 2 reversed",
            "reverse_both": "orientations of both spheres (and of the glued manifold) reversed",
        }[self.kind]

    def apply(self, g: GluingMatrix) -> GluingMatrix:
        return GluingMatrix.from_matrix(matmul(matmul(self.left, g.matrix), self.right))

    def apply_sides(self, side1: PeripheralHomologyData, side2: PeripheralHomologyData):
        """Peripheral data in the new coordinates."""
        if self.kind == "twist1":
            mu = [m + self.param * l for m, l in zip(side1.mu_image, side1.lambda_image)]
            return side1.with_images(mu=mu), side2
        if self.kind == "twist2":
            mu = [m + self.param * l for m, l in zip(side2.mu_image, side2.lambda_image)]
            return side1, side2.with_images(mu=mu)
        if self.kind == "reverse2":
            return side1, side2.with_images(mu=[-x for x in side2.mu_image], lam=[-x for x in side2.lambda_image])
        return (side1.with_images(lam=[-x for x in side1.lambda_image]),
                side2.with_images(lam=[-x for x in side2.lambda_image]))


@dataclass(frozen=True)
class NormalizationResult:
    moves: tuple
    normal: GluingMatrix
    orientation_reversed: bool
    n: int
    notes: tuple = field(default=())


def compose_moves(moves: Sequence[Move], g: GluingMatrix) -> GluingMatrix:
    """Apply moves as one product ``L g R`` of integer matrices."""
    L, R = identity(2), identity(2)
    for mv in moves:
        L = matmul(mv.left, L)
        R = matmul(R, mv.right)
    return GluingMatrix.from_matrix(matmul(matmul(L, g.matrix), R))


def normalize_order4_gluing(g: GluingMatrix) -> NormalizationResult:
    """Bring a determinant -1 gluing to ``(1, 0, -n, -1)`` with ``n = |c|``."""
    if g.det != -1:
        raise WrongDeterminant(f"normalization needs determinant -1, got {g.det}")
    n = abs(g.c)
    if n == 0:
        raise NotNormalizable("c = 0: the longitudes are glued to each other")
    if n == 4:
        assert g.a % 2 == 1, "a must be odd when ad - bc = -1 and |c| = 4"
    moves = []
    cur = g
    k = None
    for target in (1, -1):
        if (target - cur.a) % cur.c == 0:
            k = (target - cur.a) // cur.c
            break
    if k is None:
        raise NotNormalizable(f"a = {g.a} is not congruent to +-1 mod {n}")
    for mv in (Move("twist1", k),) if k else ():
        moves.append(mv)
        cur = mv.apply(cur)
    if cur.a == -1:
        moves.append(Move("reverse2"))
        cur = moves[-1].apply(cur)
    if cur.b != 0:
        moves.append(Move("twist2", cur.b))
        cur = moves[-1].apply(cur)
    reversed_ = False
    if cur.c > 0:
        moves.append(Move("reverse_both"))
        cur = moves[-1].apply(cur)
        reversed_ = True
    assert cur.entries == (1, 0, -n, -1), cur
    return NormalizationResult(tuple(moves), cur, reversed_, n, tuple(m.note for m in moves))
