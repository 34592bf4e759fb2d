import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grouplattice.groups import (Cyclic, DirectProduct, GroupSpecError, OrderCapError, Symmetric,
                                 build_group, conjugate, cycle_label, is_subgroup, parse_spec,
                                 spec_order, split_top_level, subgroup_closure)


def test_left_to_right_composition():
    G = build_group("S(3)")
    assert G.label(G.product("(12)", "(13)")) == "(123)"
    assert G.label(G.product("(13)", "(23)")) == "(123)"
    assert G.label(G.product("(23)", "(12)")) == "(123)"
    assert G.label(G.product("(12)", "(23)")) == "(132)"


def test_s3_element_order():
    G = build_group("S(3)")
    assert G.labels(range(6)) == ["e", "(23)", "(12)", "(123)", "(132)", "(13)"]


@pytest.mark.parametrize("text,order", [("Z(4)", 4), ("S(3)", 6), ("A(4)", 12), ("A(5)", 60),
                                        ("S(4)", 24), ("Z(3)xZ(3)", 9), ("Z(2)xZ(2)xZ(2)", 8)])
def test_orders(text, order):
    assert build_group(text).order == order
    assert spec_order(parse_spec(text)) == order


def test_parse_tree():
    assert parse_spec("Z(3)xS(3)") == DirectProduct(Cyclic(3), Symmetric(3))


@pytest.mark.parametrize("bad", ["Q(3)", "Z()", "Z(0)", "S(3", "", "Z(3)x"])
def test_bad_specs(bad):
    with pytest.raises(GroupSpecError):
        build_group(bad)


def test_order_cap():
    with pytest.raises(OrderCapError):
        build_group("S(8)", order_cap=1000)


def test_element_literals():
    G = build_group("Z(3)xZ(3)")
    assert G.label(G.index("(1,2)")) == "(1,2)"
    A = build_group("A(4)")
    assert A.label(A.index("(12)(34)")) == "(12)(34)"
    with pytest.raises(KeyError):
        A.index("(12)")


def test_cycle_label_starts_at_smallest_point():
    assert cycle_label((0, 1, 2)) == "e"
    assert cycle_label((1, 2, 0)) == "(123)"
    assert cycle_label((1, 0, 3, 2)) == "(12)(34)"


def test_split_top_level():
    assert split_top_level("(12),(13), (23)") == ["(12)", "(13)", "(23)"]
    assert split_top_level("(1,0),(0,1)") == ["(1,0)", "(0,1)"]


def test_subgroups():
    G = build_group("S(3)")
    H = subgroup_closure(G, [G.index("(123)")])
    assert len(H) == 3 and is_subgroup(G, H)
    assert not is_subgroup(G, {G.identity, G.index("(12)"), G.index("(13)")})


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["Z(5)", "S(3)", "A(4)", "Z(2)xZ(3)", "S(4)"]), st.data())
def test_group_axioms(text, data):
    G = build_group(text)
    n = G.order
    a, b, c = (data.draw(st.integers(0, n - 1)) for _ in range(3))
    assert G.mul[G.mul[a, b], c] == G.mul[a, G.mul[b, c]]
    assert G.mul[a, G.identity] == a == G.mul[G.identity, a]
    assert G.mul[a, G.inv[a]] == G.identity
    assert conjugate(G, a, b) == G.product(a, b, int(G.inv[a]))


def test_tables_are_latin_squares():
    G = build_group("A(4)")
    for row in G.mul:
        assert sorted(row.tolist()) == list(range(G.order))
    assert np.array_equal(np.sort(G.mul, axis=0), np.tile(np.arange(G.order)[:, None], G.order))
