"""Finitely presented groups with a peripheral pair, words, representation
assignments, abelianization and Alexander polynomials.

A word is a tuple of nonzero integers: ``+k`` is the k-th generator (1-based)
and ``-k`` its inverse.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidGroup, MissingPolynomial, NoFreeQuotient
from .homology import smith_normal_form
from .su2 import IDENTITY, UnitQuaternion, commutator_defect_array, qinv, qmul

Word = tuple


def word_from_string(text: str, generators: Sequence[str]) -> Word:
    """Parse ``"x x Y"`` or ``"x^2 y^-3"``; an upper-case single-letter name is
    the inverse of its lower-case generator."""
    index = {g: k + 1 for k, g in enumerate(generators)}
    out = []
    for tok in text.replace("*", " ").split():
        name, _, exp = tok.partition("^")
        e = int(exp) if exp else 1
        if name in index:
            k = index[name]
        elif name.lower() in index and len(name) == 1:
            k, e = index[name.lower()], -e
        else:
            raise InvalidGroup(f"unknown generator {name!r}")
        out.extend([k if e > 0 else -k] * abs(e))
    return tuple(out)


def word_to_string(word: Word, generators: Sequence[str]) -> str:
    parts = []
    for x in word:
        g = generators[abs(x) - 1]
        parts.append(g if x > 0 else g + "^-1")
    return " ".join(parts) if parts else "1"


def inverse_word(word: Word) -> Word:
    return tuple(-x for x in reversed(word))


def reduce_word(word: Word) -> Word:
    out: list = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def power_word(word: Word, n: int) -> Word:
    base = word if n >= 0 else inverse_word(word)
    return tuple(base) * abs(n)


@dataclass(frozen=True)
class FPGroup:
    generators: tuple
    relators: tuple
    mu_word: tuple = ()
    lambda_word: tuple = ()
    alexander_coeffs: tuple | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "relators", tuple(tuple(int(x) for x in r) for r in self.relators))
        object.__setattr__(self, "mu_word", tuple(int(x) for x in self.mu_word))
        object.__setattr__(self, "lambda_word", tuple(int(x) for x in self.lambda_word))
        n = len(self.generators)
        if n == 0:
            raise InvalidGroup("a group needs at least one generator")
        for w in self.relators + (self.mu_word, self.lambda_word):
            for x in w:
                if x == 0 or abs(x) > n:
                    raise InvalidGroup(f"word {w} references a missing generator")
        if self.alexander_coeffs is not None:
            c = tuple(int(x) for x in self.alexander_coeffs)
            object.__setattr__(self, "alexander_coeffs", c)
            if not c:
                raise InvalidGroup("empty Alexander polynomial")
            if c != c[::-1] and c != tuple(-x for x in c[::-1]):
                raise InvalidGroup(f"Alexander coefficients {c} are not palindromic up to sign")
            if abs(sum(c)) != 1:
                raise InvalidGroup(f"Alexander polynomial has Delta(1) = {sum(c)}, expected +-1")

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    @property
    def has_peripheral(self) -> bool:
        return bool(self.mu_word)

    def exponent_sums(self, word: Word) -> list:
        v = [0] * self.n_generators
        for x in word:
            v[abs(x) - 1] += 1 if x > 0 else -1
        return v

    def relation_matrix(self) -> list:
        """Rows are relators, columns generators (exponent sums)."""
        return [self.exponent_sums(r) for r in self.relators]

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "generators": list(self.generators),
            "relators": [list(r) for r in self.relators],
            "mu": list(self.mu_word),
            "lambda": list(self.lambda_word),
        }
        if self.alexander_coeffs is not None:
            d["alexander"] = list(self.alexander_coeffs)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "FPGroup":
        try:
            return cls(
                generators=tuple(d["generators"]),
                relators=tuple(tuple(r) for r in d["relators"]),
                mu_word=tuple(d.get("mu", ())),
                lambda_word=tuple(d.get("lambda", ())),
                alexander_coeffs=tuple(d["alexander"]) if d.get("alexander") is not None else None,
                name=d.get("name", ""),
            )
        except KeyError as exc:
            raise InvalidGroup(f"group JSON lacks field {exc}") from None


def klein_group() -> FPGroup:
    """Fundamental group of the twisted I-bundle over the Klein bottle,
    ``<a, b | a b a^-1 b>``, with ``mu = a^2`` (fiber) and ``lambda = b``."""
    return FPGroup(("a", "b"), ((1, 2, -1, 2),), (1, 1), (2,), None, "klein_bundle")


# ---------------------------------------------------------------------------
# evaluation


def _word_array(word: Word):
    idx = np.array([abs(x) - 1 for x in word], dtype=int)
    sgn = np.array([1 if x > 0 else -1 for x in word], dtype=int)
    return idx, sgn


def eval_word_array(word: Word, Q) -> np.ndarray:
    """Evaluate a word on batched generator images ``Q`` of shape (..., n, 4)."""
    Q = np.asarray(Q, dtype=float)
    out = np.zeros(Q.shape[:-2] + (4,))
    out[..., 0] = 1.0
    for x in word:
        q = Q[..., abs(x) - 1, :]
        out = qmul(out, q if x > 0 else qinv(q))
    return out


def relator_residuals_array(group: FPGroup, Q) -> np.ndarray:
    """``max_r |rho(r) - 1|`` for batched images (shape (...,))."""
    Q = np.asarray(Q, dtype=float)
    res = np.zeros(Q.shape[:-2])
    one = np.array([1.0, 0.0, 0.0, 0.0])
    for r in group.relators:
        res = np.maximum(res, np.linalg.norm(eval_word_array(r, Q) - one, axis=-1))
    return res


def max_commutator_defect_array(Q) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[-2]
    out = np.zeros(Q.shape[:-2])
    for i in range(n):
        for j in range(i + 1, n):
            out = np.maximum(out, commutator_defect_array(Q[..., i, :], Q[..., j, :]))
    return out


ABELIAN_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class RepAssignment:
    """Images of the generators, with the relator residual and abelian flag."""

    generators: tuple
    values: tuple
    residual: float
    abelian: bool
    extra: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_array(cls, group: FPGroup, Q, **extra) -> "RepAssignment":
        Q = np.asarray(Q, dtype=float).reshape(group.n_generators, 4)
        vals = tuple(UnitQuaternion.from_array(q) for q in Q)
        arr = np.array([v.as_array() for v in vals])
        res = float(relator_residuals_array(group, arr)) if group.relators else 0.0
        ab = bool(max_commutator_defect_array(arr) < ABELIAN_TOL)
        return cls(tuple(group.generators), vals, res, ab, dict(extra))

    def as_array(self) -> np.ndarray:
        return np.array([v.as_array() for v in self.values])

    def __getitem__(self, name: str) -> UnitQuaternion:
        return self.values[self.generators.index(name)]

    def as_dict(self) -> dict:
        return dict(zip(self.generators, self.values))

    @property
    def nonabelian_defect(self) -> float:
        return float(max_commutator_defect_array(self.as_array()))

    def to_json(self) -> dict:
        return {
            "generators": {g: list(v.as_tuple()) for g, v in zip(self.generators, self.values)},
            "residual": self.residual,
            "abelian": self.abelian,
        }


def eval_word(word: Word, assignment) -> UnitQuaternion:
    """Product of generator images along the word."""
    if isinstance(assignment, RepAssignment):
        arr = assignment.as_array()
    elif isinstance(assignment, Mapping):
        arr = np.array([q.as_array() for q in assignment.values()])
    else:
        arr = np.array([q.as_array() if isinstance(q, UnitQuaternion) else q for q in assignment], dtype=float)
    if not word:
        return IDENTITY
    return UnitQuaternion.from_array(eval_word_array(word, arr))


def peripheral_images(group: FPGroup, Q):
    Q = np.asarray(Q, dtype=float)
    return eval_word_array(group.mu_word, Q), eval_word_array(group.lambda_word, Q)


# ---------------------------------------------------------------------------
# abelianization


def _rational_nullspace(R: list, n: int) -> list:
    """Basis of ``{w in Q^n : R w = 0}`` by exact elimination."""
    A = [[Fraction(x) for x in row] for row in R]
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        pv = A[r][c]
        A[r] = [x / pv for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        w = [Fraction(0)] * n
        w[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            w[pc] = -A[i][f]
        basis.append(w)
    return basis


def abelian_weights(group: FPGroup) -> list:
    """Rational weights ``w`` with ``w(relator) = 0`` and ``w(mu) = 1``,
    preferring ``w(lambda) = 0``; ``rho(g) = e^{i alpha w(g)}`` is then an
    abelian representation with ``rho(mu) = e^{i alpha}``."""
    n = group.n_generators
    basis = _rational_nullspace(group.relation_matrix(), n)
    emu = group.exponent_sums(group.mu_word)
    elam = group.exponent_sums(group.lambda_word)
    pair = lambda w, e: sum(a * b for a, b in zip(w, e))  # noqa: E731
    useful = [w for w in basis if pair(w, emu) != 0]
    if not useful:
        raise NoFreeQuotient(f"{group.name or 'group'}: mu has no free image in H_1")
    # try to kill lambda with a combination of two basis vectors
    w = useful[0]
    if pair(w, elam) != 0:
        for v in basis:
            if v is w:
                continue
            det = pair(w, emu) * pair(v, elam) - pair(v, emu) * pair(w, elam)
            if det != 0:
                # solve s*w + t*v with mu-pairing 1, lambda-pairing 0
                s = pair(v, elam) / det
                t = -pair(w, elam) / det
                w = [s * a + t * b for a, b in zip(w, v)]
                break
    m = pair(w, emu)
    return [x / m for x in w]


def abelian_representations(group: FPGroup, alpha: float) -> RepAssignment:
    w = abelian_weights(group)
    Q = np.array([[math.cos(alpha * float(x)), math.sin(alpha * float(x)), 0.0, 0.0] for x in w])
    return RepAssignment.from_array(group, Q)


def abelianization(group: FPGroup) -> list:
    """Invariant factors of ``H_1`` of the presentation."""
    from .homology import cokernel

    R = group.relation_matrix()
    if not R:
        return [0] * group.n_generators
    return cokernel([list(c) for c in zip(*R)])


def torsion_characters(group: FPGroup):
    """Angle vectors ``theta`` (one per generator) of all characters of the
    torsion of ``H_1``, together with a free direction (or ``None``)."""
    R = group.relation_matrix()
    n = group.n_generators
    if not R:
        R = [[0] * n]
    snf = smith_normal_form(R)
    V = snf.V
    d = list(snf.invariant_factors) + [0] * (n - len(snf.invariant_factors))
    choices = []
    free_dirs = []
    for i in range(n):
        if d[i] == 0:
            free_dirs.append(i)
            choices.append([Fraction(0)])
        else:
            choices.append([Fraction(k, d[i]) for k in range(d[i])])
    chars = [[]]
    for opts in choices:
        chars = [c + [o] for c in chars for o in opts]
    out = []
    for eta in chars:
        theta = [sum(V[g][i] * eta[i] for i in range(n)) for g in range(n)]
        out.append([float(2 * math.pi * t) for t in theta])
    free = [[V[g][i] for g in range(n)] for i in free_dirs]
    return out, free


# ---------------------------------------------------------------------------
# Alexander polynomial


def alexander_eval(group: FPGroup, alpha: float) -> complex:
    """Symmetrized Alexander polynomial at ``t = e^{2 i alpha}``."""
    if group.alexander_coeffs is None:
        raise MissingPolynomial(f"{group.name or 'group'} carries no Alexander polynomial")
    c = group.alexander_coeffs
    off = (len(c) - 1) / 2.0
    return complex(sum(ck * cmath.exp(2j * alpha * (k - off)) for k, ck in enumerate(c)))


def _laurent_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for a, x in p.items():
        for b, y in q.items():
            out[a + b] = out.get(a + b, 0) + x * y
    return {k: v for k, v in out.items() if v}


def normalize_laurent(p: dict) -> tuple:
    """Coefficient tuple from lowest degree, leading coefficient positive."""
    p = {k: v for k, v in p.items() if v}
    if not p:
        return (0,)
    lo, hi = min(p), max(p)
    c = [p.get(k, 0) for k in range(lo, hi + 1)]
    if c[-1] < 0:
        c = [-x for x in c]
    return tuple(c)


def fox_alexander(group: FPGroup) -> tuple:
    """Alexander polynomial of a two-generator one-relator knot group by Fox
    calculus: ``Delta = (dr/dy)^ab (t - 1) / (t^{w(x)} - 1)``."""
    if group.n_generators != 2 or len(group.relators) != 1:
        raise InvalidGroup("Fox calculus route needs a two-generator one-relator presentation")
    w = [int(x) for x in abelian_weights(group)]
    r = group.relators[0]
    # derivative with respect to generator 2
    deriv: dict = {}
    prefix = 0
    for x in r:
        g = abs(x) - 1
        if x > 0:
            if g == 1:
                deriv[prefix] = deriv.get(prefix, 0) + 1
            prefix += w[g]
        else:
            prefix -= w[g]
            if g == 1:
                deriv[prefix] = deriv.get(prefix, 0) - 1
    num = _laurent_mul(deriv, {1: 1, 0: -1})
    # divide by t^{w(x)} - 1 exactly
    a = abs(w[0])
    if a == 0:
        raise InvalidGroup("first generator has zero abelian weight")
    num = {k: v for k, v in num.items() if v}
    lo = min(num)
    coeffs = [num.get(k, 0) for k in range(lo, max(num) + 1)]
    quot = [0] * (len(coeffs) - a)
    rem = list(coeffs)
    for i in range(len(coeffs) - 1, a - 1, -1):
        q = rem[i]
        quot[i - a] = q
        rem[i] -= q
        rem[i - a] += q
    if any(rem):
        raise InvalidGroup("Fox derivative is not divisible as expected")
    return normalize_laurent({k: v for k, v in enumerate(quot)})


# ---------------------------------------------------------------------------
# amalgams


def shift_word(word: Word, offset: int) -> Word:
    return tuple(x + offset if x > 0 else x - offset for x in word)


def amalgamate(g1: FPGroup, g2: FPGroup, matches: Sequence, name: str = "") -> FPGroup:
    """Presentation of ``g1 * g2 / <<w1 = w2>>`` for each ``(w1, w2)`` in
    ``matches`` (``w1`` a word in ``g1``, ``w2`` in ``g2``).  Generators are
    prefixed ``1.`` and ``2.``; the peripheral words are dropped."""
    n1 = g1.n_generators
    gens = tuple(f"1.{g}" for g in g1.generators) + tuple(f"2.{g}" for g in g2.generators)
    rels = list(g1.relators) + [shift_word(r, n1) for r in g2.relators]
    for w1, w2 in matches:
        rels.append(reduce_word(tuple(w1) + inverse_word(shift_word(w2, n1))))
    return FPGroup(gens, tuple(rels), (), (), None, name or f"{g1.name}+{g2.name}")
