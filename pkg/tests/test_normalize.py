import random

import pytest

from cqa import catalog
from cqa.model import Atom, Composite, ConstTerm, Instance, Query, binary, build_query_graph, holds
from cqa.normalize import (UnaryOnlyQuery, decompose_wide, eliminate_constants_duplicates, expand_all_key,
                           is_purified, normalize, normalize_query, purify, remove_unary, rename_domains, replay,
                           split_components)
from cqa.oracle import certain_bruteforce
from cqa.randomized import random_raw_instance, random_raw_query


def test_repeated_variable_drops_the_whole_key_group():
    # (a,b) may be chosen in a repair, so the a-group cannot be trusted
    q = Query((Atom("R", ("x", "x")),))
    inst = Instance({"R": [("a", "a"), ("a", "b"), ("c", "c")]})
    q2, inst2 = eliminate_constants_duplicates(q, inst)
    assert q2.atoms[0].is_clean()
    assert inst2["R"] == {("c", "c")}
    assert certain_bruteforce(q, inst) == certain_bruteforce(q2, inst2)


def test_repeated_variable_in_all_key_atom_filters_tuples():
    q = Query((Atom("R", ("x", "x"), all_key=True),))
    q2, inst2 = eliminate_constants_duplicates(q, Instance({"R": [("a", "a"), ("a", "b")]}))
    assert inst2["R"] == {("a", "a")}


def test_constant_filter():
    q = Query((Atom("R", ("x", ConstTerm("c"))),))
    q2, inst2 = eliminate_constants_duplicates(q, Instance({"R": [("a", "c"), ("b", "d")]}))
    assert inst2["R"] == {("a", "c")}
    assert q2.atoms[0].terms[0] == "x"


def test_clean_atom_unchanged():
    q, inst = catalog.Q2, Instance({"R": [("a", "b")]})
    trace: list = []
    assert eliminate_constants_duplicates(q, inst, trace) == (q, inst)
    assert trace == []


def test_remove_unary():
    q = Query((Atom("U", ("x",)), binary("R", "x", "y")))
    q2, inst2 = remove_unary(q, Instance({"U": [("a",)], "R": [("a", "b"), ("c", "d")]}))
    assert q2.names == ("R",)
    assert inst2["R"] == {("a", "b")}


def test_remove_unary_empty_filter_kills_the_query():
    q = Query((Atom("U", ("x",)), binary("R", "x", "y")))
    q2, inst2 = remove_unary(q, Instance({"R": [("a", "b")]}))
    assert inst2.size == 0 and not holds(q2, inst2)


def test_unary_only_query_is_decided_directly():
    q = Query((Atom("U", ("x",)),))
    with pytest.raises(UnaryOnlyQuery):
        remove_unary(q, Instance({"U": [("a",)]}))
    form = normalize(q, Instance({"U": [("a",)]}))
    assert form.components[0].decided is True


def test_expand_all_key():
    q = Query((Atom("R", ("x1", "x2"), all_key=True),))
    q2, inst2 = expand_all_key(q, Instance({"R": [("a1", "a2")]}))
    row = Composite("row", ("a1", "a2"))
    assert q2.names == ("R~1", "R~2")
    assert all(a.consistent for a in q2.atoms)
    assert inst2["R~1"] == {(row, "a1")} and inst2["R~2"] == {(row, "a2")}


def test_decompose_wide():
    q = Query((Atom("R", ("x", "y1", "y2")),))
    q2, inst2 = decompose_wide(q, Instance({"R": [("a", "b1", "b2")]}))
    row = Composite("row", ("b1", "b2"))
    assert q2.names == ("R", "R~1", "R~2")
    assert not q2.atom("R").consistent and q2.atom("R~1").consistent
    assert inst2["R"] == {("a", row)}
    assert inst2["R~2"] == {(row, "b2")}


def test_binary_atom_not_decomposed():
    q, inst = catalog.Q2, Instance({"R": [("a", "b")]})
    assert decompose_wide(q, inst) == (q, inst)


def test_purify_examples():
    assert purify(catalog.C3, catalog.CYCLE_INSTANCE) == catalog.CYCLE_INSTANCE
    inst = Instance({"R": [("a", "b"), ("a", "b'")], "S": [("b", "c")]})
    assert purify(catalog.PATH2, inst).size == 0
    assert is_purified(catalog.H2, catalog.H2_INSTANCE)


def test_rename_domains():
    joined = Instance({"R": [("a", "b")], "S": [("b", "c")]})
    assert rename_domains(catalog.PATH2, joined) == joined
    q = Query((binary("R", "x", "y"), binary("S", "z", "w")))
    out = rename_domains(q, Instance({"R": [("a", "b")], "S": [("a", "c")]}))
    assert out["R"] == {(Composite("at", ("x", "a")), "b")}
    assert out["S"] == {(Composite("at", ("z", "a")), "c")}
    assert rename_domains(q, out) == out


def test_split_components():
    assert len(split_components(catalog.K1)) == 1
    parts = split_components(Query((binary("R", "x", "y"), binary("S", "z", "w"))))
    assert [p.names for p in parts] == [("R",), ("S",)]


def test_components_classified_independently():
    from cqa.graph import classify
    q = Query(catalog.K1.atoms + (binary("E", "p", "q", True),))
    graphs = [build_query_graph(c) for c in normalize_query(q)]
    assert sorted(classify(g).verdict for g in graphs) == ["PTIME", "coNP-complete"]


def test_graph_representable_query_is_identity():
    form = normalize(catalog.H, Instance())
    assert form.trace == [] and form.query == catalog.H


def test_reserved_names_rejected():
    with pytest.raises(ValueError):
        normalize(Query((binary("R~1", "x", "y"),)), Instance())


def test_trace_replays_to_the_output_query():
    rng = random.Random(5)
    for _ in range(200):
        q = random_raw_query(rng)
        form = normalize(q, Instance())
        kept = {a.name for c in form.components if c.decided is None for a in c.query.atoms}
        replayed = replay(q, form.trace)
        assert {a.name for a in replayed.atoms if a.arity > 1} >= kept
        for a in replayed.atoms:
            if a.name in kept:
                assert a == form.query.atom(a.name)


def test_each_rewrite_preserves_certainty():
    rng = random.Random(6)
    for _ in range(150):
        q = random_raw_query(rng)
        inst = random_raw_instance(rng, q, domain=2)
        want = certain_bruteforce(q, inst)
        q1, i1 = eliminate_constants_duplicates(q, inst)
        assert certain_bruteforce(q1, i1) == want
        q2, i2 = expand_all_key(q1, i1)
        assert certain_bruteforce(q2, i2) == want
        q3, i3 = decompose_wide(q2, i2)
        assert certain_bruteforce(q3, i3) == want
