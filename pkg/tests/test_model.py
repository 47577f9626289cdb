import pytest

from cqa import catalog
from cqa.model import (Atom, Composite, Compression, ConstTerm, Edge, Instance, Query, QueryGraph, binary,
                       build_instance_graph, build_query_graph, check_instance, const_from_json, const_key,
                       const_text, const_to_json, eval_full, holds, is_repair_of, key_groups)


def test_composite_json_round_trip():
    c = Composite("pair", (Composite("clause", ("1",)), "x"))
    assert const_from_json(const_to_json(c)) == c
    assert const_from_json(3) == "3"
    with pytest.raises(ValueError):
        const_from_json([1, 2])


def test_const_order_is_total():
    cs = ["b", Composite("a", ("z",)), "a", Composite("a", ())]
    assert sorted(cs, key=const_key) == ["a", "b", Composite("a", ()), Composite("a", ("z",))]
    assert const_text("a") != const_text(Composite("a", ()))


def test_atom_key_modes():
    assert Atom("U", ("x",)).consistent
    assert Atom("A", ("x", "y"), all_key=True).consistent
    r = Atom("R", ("x", "y", "z"))
    assert r.key_len == 1 and not r.consistent
    assert not Atom("R", ("x", "x")).is_clean()
    assert not Atom("R", ("x", ConstTerm("a"))).is_clean()


def test_query_rejects_self_joins():
    with pytest.raises(ValueError):
        Query((binary("R", "x", "y"), binary("R", "y", "z")))


def test_instance_drops_empty_relations():
    inst = Instance({"R": [("a", "b")], "S": []})
    assert inst.names == ("R",)
    assert inst["S"] == frozenset()
    assert inst.size == 1


def test_key_groups_and_repairs():
    q = catalog.FRUGAL_QUERY
    groups = key_groups(q, catalog.FRUGAL_INSTANCE)
    assert len(groups[("R", ("a1",))]) == 2
    repair = Instance({"R": [("a1", "b1"), ("a2", "b3"), ("a3", "b4")],
                       "S": [("b1", "a1"), ("b3", "a2"), ("b4", "a3"), ("b5", "a3")]})
    assert is_repair_of(q, repair, catalog.FRUGAL_INSTANCE)
    assert not is_repair_of(q, catalog.FRUGAL_INSTANCE, catalog.FRUGAL_INSTANCE)


def test_check_instance_arity_and_consistency():
    q = Query((binary("R", "x", "y", consistent=True),))
    with pytest.raises(ValueError):
        check_instance(q, Instance({"R": [("a", "b", "c")]}))
    with pytest.raises(ValueError):
        check_instance(q, Instance({"R": [("a", "b"), ("a", "c")]}))


def test_eval_full_handles_constants_and_repeats():
    q = Query((Atom("R", ("x", "x")), Atom("S", ("x", ConstTerm("c")))))
    inst = Instance({"R": [("a", "a"), ("b", "c")], "S": [("a", "c"), ("b", "c"), ("a", "d")]})
    ans = eval_full(q, inst)
    assert ans.schema == ("x",)
    assert set(ans.tuples) == {("a",)}
    assert holds(q, inst)
    assert not holds(q, Instance())


def test_compression_expand_and_violations():
    c = Compression(("x",), frozenset({frozenset({("a",), ("b",)}), frozenset({("c",)})}))
    assert c.violations() == []
    assert c.expand() == frozenset({frozenset({("a",), ("c",)}), frozenset({("b",), ("c",)})})
    bad = Compression(("x", "y"), frozenset({frozenset({("a", "1")}), frozenset({("a", "2")})}))
    assert bad.violations()
    assert Compression.from_json(c.to_json()) == c
    assert c.reorder(("x",)) == c


def test_query_graph_requires_binary_single_key():
    with pytest.raises(ValueError, match="normalize"):
        build_query_graph(Query((Atom("R", ("x", "y", "z")),)))
    g = build_query_graph(catalog.H)
    assert g.inconsistent == ("R1", "R3", "S", "T")
    assert g.to_query().names == tuple(sorted(catalog.H.names))


def test_graph_retype_and_add_edge():
    g = build_query_graph(catalog.Q2)
    r = g.retype(["R"])
    assert r.edge("R").consistent and not r.edge("S").consistent
    g2 = g.add_edge(Edge("A", "x", "z", True))
    assert "A" in g2.names and "z" in g2.vertices


def test_instance_graph_is_keyed_by_relation():
    g = build_instance_graph(catalog.C3, catalog.CYCLE_INSTANCE)
    assert g.number_of_edges() == sum(len(r) for _, r in catalog.CYCLE_INSTANCE.items())
    assert ("a1", "b1", "R") in g.edges(keys=True)


def test_graph_edges_sorted_by_name():
    g = QueryGraph(frozenset({"x", "y"}), (Edge("S", "y", "x", False), Edge("R", "x", "y", False)))
    assert g.names == ("R", "S")
