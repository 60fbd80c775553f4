"""Knot-group catalog: torus and two-bridge constructions, peripheral
validation, and JSON persistence.

Peripheral words are stored data.  :func:`validate_peripheral` checks them
homologically and numerically instead of trusting the construction.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidGroup, InvalidParameters, ValidationFailed
from .groups import FPGroup, eval_word_array, inverse_word, power_word, reduce_word
from .homology import PeripheralHomologyData, SlopeClass, filling_homology, group_order, smith_normal_form
from .reps import solve_representations
from .su2 import commutator_defect_array


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    group: FPGroup
    family: dict
    declared_surgeries: tuple = ()
    notes: str = ""

    def lens_slopes(self) -> list:
        return [s for s, lens in self.declared_surgeries if lens]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "family": dict(self.family),
            "group": self.group.to_dict(),
            "declared_surgeries": [{"slope": f"{s.r}/{s.s}", "lens": bool(l)} for s, l in self.declared_surgeries],
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CatalogEntry":
        if "group" not in d:
            # a bare group file
            g = FPGroup.from_dict(d)
            return cls(g.name or "group", g, {"type": "custom"})
        surg = tuple((SlopeClass.parse(s["slope"]), bool(s.get("lens", False))) for s in d.get("declared_surgeries", ()))
        return cls(d["name"], FPGroup.from_dict(d["group"]), dict(d.get("family", {})), surg, d.get("notes", ""))


# ---------------------------------------------------------------------------
# Laurent helpers


def _poly_divide(num: list, den: list) -> list:
    """Exact division of integer polynomials (lowest degree first)."""
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1]
        if c % den[-1]:
            raise ArithmeticError("inexact polynomial division")
        q = c // den[-1]
        out[i] = q
        for j, dj in enumerate(den):
            num[i + j] -= q * dj
    if any(num[: len(den) - 1]):
        raise ArithmeticError("nonzero remainder")
    return out


def _t_power_minus_one(n: int) -> list:
    return [-1] + [0] * (n - 1) + [1]


def torus_alexander(p: int, q: int) -> tuple:
    """``(t^{pq} - 1)(t - 1) / ((t^p - 1)(t^q - 1))``."""
    p, q = abs(p), abs(q)
    num = np.polynomial.polynomial.polymul(_t_power_minus_one(p * q), [-1, 1]).astype(int).tolist()
    den = np.polynomial.polynomial.polymul(_t_power_minus_one(p), _t_power_minus_one(q)).astype(int).tolist()
    return tuple(_poly_divide(num, den))


def two_bridge_signs(p: int, q: int) -> list:
    return [(-1) ** ((i * q) // p) for i in range(1, p)]


def two_bridge_alexander(p: int, q: int) -> tuple:
    """``sum_k (-1)^k t^{e_1 + ... + e_k}`` normalized to lowest degree 0
    with positive leading coefficient."""
    eps = two_bridge_signs(p, q)
    expo = [0]
    for e in eps:
        expo.append(expo[-1] + e)
    terms: dict = {}
    for k, x in enumerate(expo):
        terms[x] = terms.get(x, 0) + (-1) ** k
    lo, hi = min(terms), max(terms)
    c = [terms.get(k, 0) for k in range(lo, hi + 1)]
    while c and c[-1] == 0:
        c.pop()
    while c and c[0] == 0:
        c.pop(0)
    if c[-1] < 0:
        c = [-x for x in c]
    return tuple(c)


# ---------------------------------------------------------------------------
# constructions


def torus_knot(p: int, q: int) -> CatalogEntry:
    """``<x, y | x^p = y^q>`` with meridian ``x^u y^v`` (``uq + vp = 1``) and
    longitude ``x^p mu^{-pq}``."""
    if math.gcd(p, q) != 1 or min(abs(p), abs(q)) < 2:
        raise InvalidParameters(f"torus knot needs coprime |p|, |q| >= 2, got ({p},{q})")
    mirror = (p < 0) != (q < 0)
    p, q = abs(p), abs(q)
    # extended Euclid for u q + v p = 1
    u, v = _bezout(q, p)
    mu = reduce_word(power_word((1,), u) + power_word((2,), v))
    lam = reduce_word(power_word((1,), p) + power_word(mu, -p * q))
    if mirror:
        lam = inverse_word(lam)
    g = FPGroup(("x", "y"), (power_word((1,), p) + power_word((2,), -q),), mu, lam, torus_alexander(p, q),
                f"T({p},{q})" + ("*" if mirror else ""))
    lens = [SlopeClass(p * q - 1, 1), SlopeClass(p * q + 1, 1)]
    if mirror:
        lens = [SlopeClass(-s.r, s.s) for s in lens]
    return CatalogEntry(g.name, g, {"type": "torus", "p": p, "q": q, "mirror": mirror},
                        tuple((s, True) for s in lens))


def _bezout(a: int, b: int):
    """``(u, v)`` with ``u a + v b = 1``."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        k = old_r // r
        old_r, r = r, old_r - k * r
        old_s, s = s, old_s - k * s
        old_t, t = t, old_t - k * t
    if old_r != 1:
        raise InvalidParameters("arguments are not coprime")
    return old_s, old_t


def two_bridge(p: int, q: int) -> CatalogEntry:
    """Two-bridge knot ``b(p, q)`` (``p`` odd, ``0 < q < p``) in the form
    ``<a, b | w a = b w>`` with ``w = a^{e1} b^{e2} a^{e3} ...``,
    ``e_i = (-1)^{floor(i q / p)}``; meridian ``a`` and longitude
    ``w~ w a^{-2 sum e}`` (``w~`` is ``w`` read backwards).  With this
    orientation ``b(p, 1)`` has the same pillowcase image as ``T(2, p)``."""
    if p % 2 == 0 or not (0 < q < p) or math.gcd(p, q) != 1:
        raise InvalidParameters(f"two-bridge knot needs odd p > q > 0 coprime, got ({p},{q})")
    eps = two_bridge_signs(p, q)
    w = tuple((1 if i % 2 == 0 else 2) * e for i, e in enumerate(eps))
    rel = reduce_word(w + (1,) + inverse_word(w) + (-2,))
    wt = tuple(reversed(w))
    lam = reduce_word(wt + w + power_word((1,), -2 * sum(eps)))
    g = FPGroup(("a", "b"), (rel,), (1,), lam, two_bridge_alexander(p, q), f"b({p},{q})")
    surg = ()
    if q == 1:
        # b(p,1) is the (2,p) torus knot
        surg = ((SlopeClass(2 * p - 1, 1), True), (SlopeClass(2 * p + 1, 1), True))
    return CatalogEntry(g.name, g, {"type": "two_bridge", "p": p, "q": q}, surg)


# ---------------------------------------------------------------------------
# validation


def peripheral_homology(group: FPGroup) -> PeripheralHomologyData:
    """``H_1`` of the presentation with the peripheral images, computed from
    the Smith form of the transposed relation matrix."""
    R = group.relation_matrix()
    n = group.n_generators
    if not R:
        return PeripheralHomologyData((0,) * n, tuple(group.exponent_sums(group.mu_word)),
                                      tuple(group.exponent_sums(group.lambda_word)))
    M = [list(c) for c in zip(*R)]  # generators x relators
    snf = smith_normal_form(M)
    d = list(snf.invariant_factors) + [0] * (n - len(snf.invariant_factors))
    keep = [i for i in range(n) if d[i] != 1]

    def coords(word):
        e = group.exponent_sums(word)
        v = [sum(snf.U[i][j] * e[j] for j in range(n)) for i in range(n)]
        return tuple((v[i] % d[i]) if d[i] else v[i] for i in keep)

    return PeripheralHomologyData(tuple(d[i] for i in keep), coords(group.mu_word), coords(group.lambda_word))


@dataclass
class ValidationReport:
    ok: bool
    clauses: dict = field(default_factory=dict)

    def to_dict(self):
        return {"ok": self.ok, "clauses": self.clauses}


def validate_peripheral(entry, n_slopes: int = 10, seed: int = 0, grid: int = 6, tol: float = 1e-9) -> ValidationReport:
    group = entry.group if isinstance(entry, CatalogEntry) else entry
    rng = np.random.default_rng(seed)
    data = peripheral_homology(group)
    report = ValidationReport(True)
    # (i) mu generates a free Z, lambda dies
    ok_i = (len(data.ambient) == 1 and data.ambient[0] == 0 and abs(data.mu_image[0]) == 1
            and data.lambda_image[0] == 0)
    report.clauses["i"] = {"ambient": list(data.ambient), "mu": list(data.mu_image), "lambda": list(data.lambda_image),
                           "ok": bool(ok_i)}
    if not ok_i:
        raise ValidationFailed(
            f"abelianization: H_1 = {list(data.ambient)}, mu -> {list(data.mu_image)}, lambda -> {list(data.lambda_image)}",
            clause="i",
        )
    # (ii) |H_1(p/q filling)| = |p|
    checked = []
    while len(checked) < n_slopes:
        p = int(rng.integers(-40, 41))
        q = int(rng.integers(1, 20))
        if p == 0 or math.gcd(p, q) != 1:
            continue
        order = group_order(filling_homology(data, SlopeClass(p, q)))
        checked.append((p, q, order))
        if order != abs(p):
            raise ValidationFailed(f"filling {p}/{q} has homology order {order}", clause="ii")
    report.clauses["ii"] = {"slopes": checked, "ok": True}
    # (iii) peripheral words commute in sampled representations
    sols = solve_representations(group, grid=grid, seed=seed)
    if sols:
        Q = np.array([s.as_array() for s in sols])
    else:
        Q = np.zeros((0, group.n_generators, 4))
    m = eval_word_array(group.mu_word, Q) if len(Q) else np.zeros((0, 4))
    l = eval_word_array(group.lambda_word, Q) if len(Q) else np.zeros((0, 4))
    defect = float(commutator_defect_array(m, l).max()) if len(Q) else 0.0
    report.clauses["iii"] = {"samples": len(Q), "max_defect": defect, "ok": defect < tol}
    if not defect < tol:
        raise ValidationFailed(f"peripheral words fail to commute (defect {defect:.3e})", clause="iii")
    return report


# ---------------------------------------------------------------------------
# persistence


def save_entry(entry: CatalogEntry, path) -> None:
    Path(path).write_text(json.dumps(entry.to_dict(), indent=2) + "\n")


def load_entry(path) -> CatalogEntry:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidGroup(f"{path}: {exc}") from None
    return CatalogEntry.from_dict(data)


def load_catalog(directory) -> dict:
    out = {}
    for f in sorted(os.listdir(directory)):
        if f.endswith(".json"):
            e = load_entry(Path(directory) / f)
            out[Path(f).stem] = e
    return out


def standard_entries() -> dict:
    """The entries shipped in ``catalog/``."""
    return {
        "trefoil": _renamed(torus_knot(2, 3), "trefoil"),
        "cinquefoil": _renamed(torus_knot(2, 5), "cinquefoil"),
        "torus_3_4": _renamed(torus_knot(3, 4), "torus_3_4"),
        "figure_eight": _renamed(two_bridge(5, 3), "figure_eight"),
        "two_bridge_3_1": _renamed(two_bridge(3, 1), "two_bridge_3_1"),
        "two_bridge_5_1": _renamed(two_bridge(5, 1), "two_bridge_5_1"),
        "two_bridge_7_3": _renamed(two_bridge(7, 3), "two_bridge_7_3"),
    }


def _renamed(e: CatalogEntry, name: str) -> CatalogEntry:
    g = FPGroup(e.group.generators, e.group.relators, e.group.mu_word, e.group.lambda_word,
                e.group.alexander_coeffs, name)
    return CatalogEntry(name, g, e.family, e.declared_surgeries, e.notes)
