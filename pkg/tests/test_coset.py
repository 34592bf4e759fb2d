import numpy as np
import pytest

from grouplattice.coset import CosetError, build_coset_diagram, reduction_relations
from grouplattice.forms import Form, d, forms_equal, theta
from grouplattice.lattice import export_dot

from conftest import TRANSPOSITIONS_S4, make_lattice

S3_TABLE = {  # row coset -> {h: coset}, cosets named by a member
    "e": {"(12)": "e", "(13)": "(13)", "(23)": "(23)"},
    "(13)": {"(12)": "(23)", "(13)": "e", "(23)": "(13)"},
    "(23)": {"(12)": "(13)", "(13)": "(23)", "(23)": "e"},
}

S4_COSETS = {
    "H": ["e", "(123)", "(132)"],
    "H(12)": ["(12)", "(23)", "(13)"],
    "H(12)(34)": ["(12)(34)", "(243)", "(143)"],
    "H(14)": ["(14)", "(1234)", "(1324)"],
    "H(13)(24)": ["(142)", "(234)", "(13)(24)"],
    "H(24)": ["(24)", "(1423)", "(1342)"],
    "H(14)(23)": ["(124)", "(14)(23)", "(134)"],
    "H(34)": ["(34)", "(1243)", "(1432)"],
}
S4_ROWS = """
H         H(12)     H(12)     H(14)     H(12)     H(24)     H(34)
H(12)     H         H         H(14)(23) H         H(13)(24) H(12)(34)
H(14)     H(13)(24) H(12)(34) H         H(14)(23) H(14)(23) H(14)(23)
H(24)     H(14)(23) H(13)(24) H(13)(24) H(12)(34) H         H(13)(24)
H(34)     H(12)(34) H(14)(23) H(12)(34) H(13)(24) H(12)(34) H
H(12)(34) H(34)     H(14)     H(34)     H(24)     H(34)     H(12)
H(13)(24) H(14)     H(24)     H(24)     H(34)     H(12)     H(24)
H(14)(23) H(24)     H(34)     H(12)     H(14)     H(14)     H(14)
"""
S4_RELATION_LETTERS = {
    "H": {"(12)", "(13)", "(23)"},
    "H(12)": {"(12)", "(13)", "(23)"},
    "H(12)(34)": {"(12)", "(14)", "(24)"},
    "H(34)": {"(12)", "(14)", "(24)"},
    "H(13)(24)": {"(13)", "(14)", "(34)"},
    "H(24)": {"(13)", "(14)", "(34)"},  # follows the action table
    "H(14)(23)": {"(23)", "(24)", "(34)"},
    "H(14)": {"(23)", "(24)", "(34)"},
}


@pytest.fixture(scope="module")
def s4():
    return make_lattice("S(4)", TRANSPOSITIONS_S4)


def test_s3_transposition_subgroup(s3):
    D = build_coset_diagram(s3, ["e", "(12)"])
    assert D.size == 3
    for row, entries in S3_TABLE.items():
        for h, target in entries.items():
            K = D.find(row)
            assert int(D.action[K, s3.positions([h])[0]]) == D.find(target)
    assert sorted(s3.label(g) for g in D.cosets[D.find("(13)")]) == ["(123)", "(13)"]
    loops = {(D.find(g), s3.group.index(h)) for g, h in [("e", "(12)"), ("(13)", "(23)"), ("(23)", "(13)")]}
    assert set(D.loops()) == loops
    assert not D.multi_edges()
    rels = reduction_relations(D)
    assert [r.kind for r in rels] == ["loop"] * 3
    assert all(r.closed and r.d_matches_delta for r in rels)
    texts = {r.describe(D) for r in rels}
    assert "e^H θ^(12) = 0" in texts


def test_s3_alternating_subgroup(s3):
    D = build_coset_diagram(s3, ["e", "(123)", "(132)"])
    assert D.size == 2 and not D.loops()
    multi = D.multi_edges()
    assert set(multi) == {(0, 1), (1, 0)}
    assert all(len(v) == 3 for v in multi.values())
    rels = reduction_relations(D)
    assert len(rels) == 4 and all(r.kind == "multi" for r in rels)
    assert all(r.closed and r.d_matches_delta for r in rels)


def test_z6_loops_and_double_arrows(z6):
    D = build_coset_diagram(z6, ["0", "2", "4"])
    assert D.size == 2
    assert D.labels() == ["H", "H+1"]
    two = z6.group.index("2")
    assert sorted(D.loops()) == [(0, two), (1, two)]
    one, three = z6.group.index("1"), z6.group.index("3")
    assert D.multi_edges() == {(0, 1): (one, three), (1, 0): (one, three)}
    rels = reduction_relations(D)
    assert sorted(r.kind for r in rels) == ["loop", "loop", "multi", "multi"]
    assert all(r.closed and r.d_matches_delta for r in rels)


def test_s4_cosets(s4):
    D = build_coset_diagram(s4, ["e", "(123)", "(132)"])
    assert D.size == 8
    for name, members in S4_COSETS.items():
        K = D.find(members[0])
        assert sorted(s4.label(g) for g in D.cosets[K]) == sorted(members)


def test_s4_action_table(s4):
    D = build_coset_diagram(s4, ["e", "(123)", "(132)"])
    rows = [line.split() for line in S4_ROWS.strip().splitlines()]
    for row in rows:
        K = D.find(S4_COSETS[row[0]][0])
        for h, target in zip(TRANSPOSITIONS_S4, row[1:]):
            assert int(D.action[K, s4.positions([h])[0]]) == D.find(S4_COSETS[target][0]), (row[0], h)


def test_s4_reduction_relations(s4):
    D = build_coset_diagram(s4, ["e", "(123)", "(132)"])
    rels = reduction_relations(D)
    assert len(rels) == 16 and all(r.kind == "multi" for r in rels)
    assert all(r.closed and r.d_matches_delta for r in rels)
    letters = {}
    for r in rels:
        letters.setdefault(r.coset, set()).update(s4.label(h) for h in r.letters)
    for name, expected in S4_RELATION_LETTERS.items():
        assert letters[D.find(S4_COSETS[name][0])] == expected


def test_out_degree_and_partition(s4, lattice):
    for L, H in [(s4, ["e", "(123)", "(132)"]), (lattice, [lattice.group.label(lattice.group.identity)])]:
        D = build_coset_diagram(L, H)
        assert D.size * len(D.H) == L.n
        assert sorted(g for K in D.cosets for g in K) == list(range(L.n))
        assert all(D.out_degree(K) == L.k for K in range(D.size))


def test_trivial_subgroup_gives_lattice(lattice):
    D = build_coset_diagram(lattice, [lattice.group.label(lattice.group.identity)])
    assert D.size == lattice.n
    for K in range(D.size):
        g = D.representative(K)
        for i in range(lattice.k):
            assert D.representative(int(D.action[K, i])) == lattice.neighbours[g, i]
    assert not D.loops() and not D.multi_edges()
    assert reduction_relations(D) == []


def test_non_subgroup_rejected(s3):
    with pytest.raises(CosetError):
        build_coset_diagram(s3, ["e", "(12)", "(13)"])
    with pytest.raises(CosetError):
        build_coset_diagram(s3, [])


def test_schreier_dot_keeps_loops_and_parallel_edges(z6):
    D = build_coset_diagram(z6, ["0", "2", "4"])
    text = export_dot(D, name="schreier")
    assert text.count("->") == D.size * z6.k
    assert '"H" -> "H"' in text


def test_coset_calculus(s3, rng):
    D = build_coset_diagram(s3, ["e", "(12)"])
    C = D.calculus()
    F1, F2 = rng.normal(size=D.size), rng.normal(size=D.size)
    assert forms_equal(C.d(F1), C.d_restricted(F1))
    assert C.leibniz_residual(F1, F2) < 1e-12
    assert np.allclose(C.restrict(C.embed(F1)), F1)
    assert not C.is_coset_function(np.arange(s3.n))
    G = s3.group
    for h in s3.S:
        # θ^h e^K = e^{K h^-1} θ^h in the ambient calculus
        for K in range(D.size):
            back = C.shifted_coset(K, int(G.inv[h]))
            assert forms_equal(theta(s3, h).rmul(C.e(K)), theta(s3, h).lmul(C.e(back)))
        assert np.allclose(C.right_action(h, F1), C.restrict(C.embed(F1)[G.mul[:, h]]))


def test_z2_single_point():
    L = make_lattice("Z(2)", ["1"], grade_cap=6)
    D = build_coset_diagram(L, ["0", "1"])
    assert D.size == 1 and len(D.loops()) == 1
    th = theta(L, "1")
    power = Form.function(L, np.ones(L.n))
    for r in range(5):  # θ^1 .. θ^5, d lands at most in grade 6
        nxt = power * th
        if r % 2 == 0:
            assert forms_equal(d(nxt), 2 * (nxt * th))
        else:
            assert forms_equal(d(nxt), 0 * (nxt * th))
        power = nxt


def test_z3_single_point():
    L = make_lattice("Z(3)", ["1", "2"])
    D = build_coset_diagram(L, ["0", "1", "2"])
    assert D.size == 1 and len(D.loops()) == 2
    t1, t2 = theta(L, "1"), theta(L, "2")
    assert forms_equal(d(t1), 2 * (t1 * t1) - t2 * t2 + t1 * t2 + t2 * t1)
    assert forms_equal(d(t2), 2 * (t2 * t2) - t1 * t1 + t1 * t2 + t2 * t1)
