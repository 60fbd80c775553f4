import json
import math
from pathlib import Path

import pytest

from su2splice.catalog import (load_catalog, load_entry, peripheral_homology, save_entry,
                               standard_entries, torus_knot, two_bridge, validate_peripheral)
from su2splice.errors import InvalidGroup, InvalidParameters, ValidationFailed
from su2splice.groups import FPGroup, alexander_eval, fox_alexander
from su2splice.homology import filling_homology, group_order
from su2splice.pillowcase import hausdorff
from su2splice.tracing import trace_pillowcase_image

PI = math.pi
CATALOG = Path(__file__).resolve().parents[1] / "catalog"


def test_torus_knot_trefoil():
    e = torus_knot(2, 3)
    assert e.group.alexander_coeffs == (1, -1, 1)
    assert validate_peripheral(e).ok
    data = peripheral_homology(e.group)
    assert data.ambient == (0,) and abs(data.mu_image[0]) == 1 and data.lambda_image == (0,)


def test_cinquefoil_alexander():
    e = torus_knot(2, 5)
    assert abs(alexander_eval(e.group, PI / 2)) == pytest.approx(5.0)


def test_figure_eight():
    e = two_bridge(5, 3)
    assert e.group.alexander_coeffs == (1, -3, 1)
    assert abs(sum(e.group.alexander_coeffs)) == 1
    assert validate_peripheral(e).ok


@pytest.mark.parametrize("name", sorted(standard_entries()))
def test_alexander_matches_fox_calculus(name, entries):
    g = entries[name].group
    fox = fox_alexander(g)
    assert fox in (g.alexander_coeffs, tuple(-c for c in g.alexander_coeffs))


@pytest.mark.parametrize("name", sorted(standard_entries()))
def test_entries_validate(name, entries):
    rep = validate_peripheral(entries[name], n_slopes=20)
    assert rep.ok and set(rep.clauses) == {"i", "ii", "iii"}


def test_lens_slopes_have_cyclic_homology(entries):
    for e in entries.values():
        for s in e.lens_slopes():
            f = filling_homology(peripheral_homology(e.group), s)
            assert len([d for d in f if d != 1]) == 1 and group_order(f) == abs(s.r)


def test_validation_clause_i(trefoil):
    bad = FPGroup(trefoil.generators, trefoil.relators, trefoil.mu_word, trefoil.mu_word,
                  trefoil.alexander_coeffs, "bad")
    with pytest.raises(ValidationFailed) as exc:
        validate_peripheral(bad)
    assert exc.value.clause == "i"


def test_validation_clause_iii(trefoil):
    # a commutator dies in H_1 but does not commute with the meridian
    lam = (1, 2, -1, -2)
    bad = FPGroup(trefoil.generators, trefoil.relators, trefoil.mu_word, lam, trefoil.alexander_coeffs, "bad")
    with pytest.raises(ValidationFailed) as exc:
        validate_peripheral(bad)
    assert exc.value.clause == "iii"


def test_invalid_parameters():
    with pytest.raises(InvalidParameters):
        torus_knot(2, 4)
    with pytest.raises(InvalidParameters):
        two_bridge(4, 1)


@pytest.mark.parametrize("p", [3, 5])
def test_two_bridge_matches_torus(p):
    step = 0.01
    a = [c.curve for c in trace_pillowcase_image(two_bridge(p, 1).group, step=step) if not c.abelian]
    b = [c.curve for c in trace_pillowcase_image(torus_knot(2, p).group, step=step) if not c.abelian]
    assert hausdorff(a, b) < 2 * step


def test_save_load_roundtrip(tmp_path, entries):
    e = entries["figure_eight"]
    path = tmp_path / "f.json"
    save_entry(e, path)
    back = load_entry(path)
    assert back.group == e.group and back.family == e.family and back.declared_surgeries == e.declared_surgeries


def test_bare_group_file(tmp_path, trefoil):
    path = tmp_path / "g.json"
    path.write_text(json.dumps(trefoil.to_dict()))
    assert load_entry(path).group == trefoil


def test_bad_json(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{not json")
    with pytest.raises(InvalidGroup):
        load_entry(path)


def test_shipped_catalog_matches_builtin(entries):
    shipped = load_catalog(CATALOG)
    assert set(shipped) == set(entries)
    for name, e in shipped.items():
        assert e.to_dict() == entries[name].to_dict()
