import numpy as np
import pytest

from grouplattice.lattice import (LatticeError, NotBicovariantError, classification_report,
                                  connected_components, enumerate_cycles, enumerate_polygons,
                                  export_dot, identity_component, is_bicovariant,
                                  is_differentiable_map, is_right_differentiable, is_universal,
                                  left_translation, right_translation)

from conftest import TRANSPOSITIONS_S4, make_lattice


def labels(L, xs):
    return sorted(L.label(x) for x in xs)


def test_s3_classification(s3):
    assert labels(s3, s3.S0) == ["(12)", "(13)", "(23)"]
    assert s3.S1 == ()
    assert labels(s3, s3.S2) == ["(123)", "(132)"]
    assert s3.independent_2form_count() == 7
    assert all(s3.multiplicity(g) == 3 for g in s3.S2)


def test_z6_classification(z6):
    assert labels(z6, z6.S0) == ["3"]
    assert labels(z6, z6.S1) == ["2", "3"]
    assert labels(z6, z6.S2) == ["4", "5"]
    assert z6.independent_2form_count() == 7


def test_s4_counts():
    L = make_lattice("S(4)", TRANSPOSITIONS_S4)
    assert len(L.S2) == 11
    assert L.independent_2form_count() == 25


def test_a4_cycles(a4):
    assert len(a4.S2) == 4 and a4.independent_2form_count() == 12
    for g in a4.S2:
        cycles = enumerate_cycles(a4, g)
        assert len(cycles) == 2
        assert sorted(len(c) for c in cycles) == [1, 3]
    report = classification_report(a4)
    entry = next(e for e in report["S2"] if e["g"] == "(124)")
    assert ["(142)"] in entry["cycles"]


def test_cycles_follow_the_walk(a4):
    G = a4.group
    for g in a4.S2:
        for cyc in enumerate_cycles(a4, g):
            for i, h in enumerate(cyc):
                assert G.product(h, cyc[(i + 1) % len(cyc)]) == g


def test_polygons_partition_pairs(lattice):
    poly = enumerate_polygons(lattice)
    n_bi = sum(1 if a == b else 2 for a, b in poly.biangles)
    total = n_bi + len(poly.triangles) + sum(len(v) for v in poly.quadrangles.values())
    assert total == lattice.k ** 2


def test_components_are_cosets():
    L = make_lattice("S(3)", ["(123)", "(132)"])
    comps = connected_components(L)
    assert len(comps) == 2
    H = identity_component(L)
    assert set(comps[0]) == H
    G = L.group
    for comp in comps:
        g = comp[0]
        assert set(comp) == {G.mul[g, h] for h in H}
    assert is_universal(L)


def test_z2_is_universal():
    assert is_universal(make_lattice("Z(2)", ["1"]))
    assert not is_universal(make_lattice("Z(4)", ["1"]))


def test_a5_not_bicovariant():
    L = make_lattice("A(5)", ["(12345)", "(15432)", "(12)(34)"])
    assert L.n == 60 and L.k == 3
    assert len(connected_components(L)) == 1
    check = is_bicovariant(L)
    assert not check
    g, h, image = check.witness
    assert L.group.conjugate(g, h) == image and not L.in_S(image)
    with pytest.raises(NotBicovariantError):
        enumerate_cycles(L, L.S[0])


def test_bicovariant_examples(s3, z4, a4):
    assert is_bicovariant(s3) and is_bicovariant(z4) and is_bicovariant(a4)


def test_bad_generating_sets():
    with pytest.raises(LatticeError):
        make_lattice("S(3)", ["e", "(12)"])
    with pytest.raises(LatticeError):
        make_lattice("S(3)", ["(1234)"])
    with pytest.raises(LatticeError):
        make_lattice("S(3)", [])


def test_translations_are_differentiable(s3):
    for g in range(s3.n):
        assert is_differentiable_map(s3, left_translation(s3, g))
        assert bool(is_right_differentiable(s3, g)) == bool(is_differentiable_map(s3, right_translation(s3, g)))


def test_z3z3_witness():
    L = make_lattice("Z(3)xZ(3)", ["(0,1)", "(1,0)"])
    X01 = {"(0,0)", "(1,0)", "(0,1)", "(2,1)", "(1,2)", "(2,2)"}
    s = ["(0,1)" if L.label(g) in X01 else "(1,0)" for g in range(L.n)]
    phi = L.group.mul[np.arange(L.n), [L.group.index(x) for x in s]]
    check = is_differentiable_map(L, phi)
    assert not check
    arrow = (L.group.index("(1,0)"), L.group.index("(2,0)"))
    assert arrow in check.violations


def test_dot_export(z4):
    text = export_dot(z4)
    assert text.startswith("digraph")
    assert text.count("->") == z4.n * z4.k
    assert '"0" -> "1" [label="1"];' in text
