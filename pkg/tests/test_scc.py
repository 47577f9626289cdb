import random

import networkx as nx
import pytest

from cqa import catalog
from cqa.model import Composite, Compression, Edge, Instance, QueryGraph, build_instance_graph, build_query_graph
from cqa.normalize import purify
from cqa.oracle import certain_bruteforce, frugal_family
from cqa.randomized import random_instance, random_strongly_connected
from cqa.scc import (chordal_decomposition, cycle_order, decomposition_violations, frugal_chord, frugal_cycle,
                     frugal_scc, long_cycle_check)


def second_component():
    # the part of the cycle instance built on a3, a4
    return Instance({r: {t for t in rows if not {"a1", "a2", "b1", "b2", "c1", "c2"} & set(t)}
                     for r, rows in catalog.CYCLE_INSTANCE.items()})


def test_long_cycle_check():
    g = build_instance_graph(catalog.C3, catalog.CYCLE_INSTANCE)
    comps = {frozenset(c) for c in nx.strongly_connected_components(g)}
    first = next(c for c in comps if "a1" in c)
    second = next(c for c in comps if "a3" in c)
    assert not long_cycle_check(g.subgraph(first), 3)
    assert long_cycle_check(g.subgraph(second), 3)
    single = build_instance_graph(catalog.C3, Instance({"R": [("a", "b")], "S": [("b", "c")], "T": [("c", "a")]}))
    assert not long_cycle_check(single, 3)


def test_frugal_cycle_examples():
    comp = frugal_cycle(catalog.C3, catalog.CYCLE_INSTANCE)
    assert comp.ordered() == [[("a1", "b1", "c1"), ("a1", "b2", "c1"), ("a2", "b2", "c2")]]
    alone = frugal_cycle(catalog.C3, second_component())
    assert alone.or_sets == frozenset()
    assert not certain_bruteforce(catalog.C3, second_component())
    one = Instance({"R": [("a", "b")], "S": [("b", "c")], "T": [("c", "a")]})
    assert frugal_cycle(catalog.C3, one).ordered() == [[("a", "b", "c")]]


def test_frugal_cycle_rejects_unpurified():
    with pytest.raises(ValueError):
        frugal_cycle(catalog.C3, Instance({"R": [("a", "b")]}))


def test_cycle_certain_iff_compression_nonempty():
    rng = random.Random(2)
    for _ in range(200):
        inst = purify(catalog.C3, random_instance(rng, catalog.C3, domain=3, answers=rng.randint(1, 6)))
        comp = frugal_cycle(catalog.C3, inst)
        assert bool(comp.or_sets) == certain_bruteforce(catalog.C3, inst)


def test_cycle_order():
    g = build_query_graph(catalog.C3)
    assert [e.name for e in cycle_order(g)] == ["R", "S", "T"]
    with pytest.raises(ValueError):
        cycle_order(build_query_graph(catalog.PATH2))


def test_decomposition_of_h2():
    dec = chordal_decomposition(build_query_graph(catalog.H2))
    assert [e.name for e in dec.base] == ["R", "S", "T"]
    assert [[e.name for e in p] for p in dec.paths] == [["U", "V"]]
    assert (dec.paths[0][0].source, dec.paths[0][-1].target) == ("y", "z")


def test_decomposition_of_pure_cycle():
    dec = chordal_decomposition(build_query_graph(catalog.C3))
    assert dec.paths == ()


def test_decomposition_requires_strong_connectivity():
    with pytest.raises(ValueError):
        chordal_decomposition(build_query_graph(catalog.PATH2))


def test_decomposition_invariants_on_random_graphs():
    rng = random.Random(3)
    for _ in range(200):
        g = random_strongly_connected(rng, max_vertices=6, max_extra=4)
        assert decomposition_violations(g, chordal_decomposition(g)) == []


def test_frugal_chord():
    comp = Compression(("u", "v"), frozenset({frozenset({("a", "b"), ("a2", "b2")}), frozenset({("c", "d")})}))
    everything = {("a", "b"), ("a2", "b2"), ("c", "d")}
    assert frugal_chord(comp, "u", "v", everything) == comp
    cut = frugal_chord(comp, "u", "v", {("a", "b"), ("c", "d")})
    assert cut.ordered() == [[("c", "d")]]


def test_frugal_chord_against_oracle():
    # cycle R,S plus consistent chord A(x,y) that misses one tuple of the first or-set
    g = QueryGraph(frozenset({"x", "y"}), (Edge("A", "x", "y", True), Edge("R", "x", "y", False),
                                           Edge("S", "y", "x", False)))
    inst = Instance({"R": [("a", "b"), ("a", "b2")], "S": [("b", "a"), ("b2", "a")], "A": [("a", "b")]})
    inst = purify(g.to_query(), inst)
    assert frugal_scc(g, inst) == frugal_family(g.to_query(), inst).compression


def test_h2_pipeline():
    runs: list = []
    inst = purify(catalog.H2, catalog.H2_INSTANCE)
    final = frugal_scc(build_query_graph(catalog.H2), inst, runs)
    assert final.reorder(("x", "y", "z", "t")).ordered() == [
        [("a1", "b1", "c1", "d"), ("a2", "b2", "c2", "d"), ("a2", "b3", "c2", "d")]]
    run = runs[0]
    assert Composite("orset", ("1",)) in run.tables.orset_const
    assert run.chord_compression == run.cycle_compression
    assert run.tables.decode(Composite("tup", ("a2", "b3", "c2"))) == ("a2", "b3", "c2")


def test_pure_cycle_scc_equals_frugal_cycle():
    g = build_query_graph(catalog.C3)
    assert frugal_scc(g, catalog.CYCLE_INSTANCE) == frugal_cycle(catalog.C3, catalog.CYCLE_INSTANCE)


def test_chord_path_that_returns_to_its_start():
    # path U,V leaves x and comes back to x
    g = QueryGraph(frozenset({"x", "y", "t"}), (
        Edge("R", "x", "y", False), Edge("S", "y", "x", False),
        Edge("U", "x", "t", False), Edge("V", "t", "x", False)))
    rng = random.Random(4)
    for _ in range(100):
        q = g.to_query()
        inst = purify(q, random_instance(rng, q, domain=2, answers=rng.randint(1, 4)))
        fam = frugal_family(q, inst)
        assert frugal_scc(g, inst) == fam.compression


def test_frugal_scc_matches_oracle_on_random_graphs():
    rng = random.Random(5)
    for _ in range(300):
        g = random_strongly_connected(rng, max_vertices=4, max_extra=3)
        q = g.to_query()
        inst = purify(q, random_instance(rng, q, domain=2, answers=rng.randint(1, 5), max_groups=8))
        comp = frugal_scc(g, inst)
        assert comp.violations() == []
        assert comp == frugal_family(q, inst).compression


def test_frugal_scc_is_invariant_under_renaming():
    rng = random.Random(6)
    for _ in range(50):
        g = random_strongly_connected(rng, max_vertices=4, max_extra=2)
        q = g.to_query()
        inst = purify(q, random_instance(rng, q, domain=2, answers=3))
        ren = {c: f"r_{c}" for c in inst.constants()}
        renamed = Instance({n: {tuple(ren[c] for c in row) for row in rows} for n, rows in inst.items()})
        a, b = frugal_scc(g, inst), frugal_scc(g, renamed)
        mapped = frozenset(frozenset(tuple(ren[c] for c in t) for t in o) for o in a.or_sets)
        assert mapped == b.or_sets


def test_frugal_cycle_rejects_non_cycles():
    with pytest.raises(ValueError):
        frugal_cycle(catalog.PATH2, Instance())
