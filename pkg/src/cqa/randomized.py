"""Seeded random queries, instances and formulas for differential testing."""
from __future__ import annotations

import random

from .graph import classify, is_strongly_connected
from .model import Atom, ConstTerm, Edge, Instance, Query, QueryGraph, build_query_graph


def random_graph(rng: random.Random, max_vertices: int = 6, max_edges: int = 6,
                 max_inconsistent: int = 4, connected: bool = True) -> QueryGraph:
    """A random query graph without self-loops; edges are named R0, R1, ..."""
    while True:
        n = rng.randint(2, max_vertices)
        vs = [f"v{i}" for i in range(n)]
        m = rng.randint(1, max_edges)
        edges = []
        bad = 0
        for i in range(m):
            u, v = rng.sample(vs, 2)
            cons = rng.random() < 0.4 or bad >= max_inconsistent
            bad += not cons
            edges.append(Edge(f"R{i}", u, v, cons))
        used = {x for e in edges for x in (e.source, e.target)}
        g = QueryGraph(frozenset(used), tuple(edges))
        if not connected or _weakly_connected(g):
            return g


def _weakly_connected(g: QueryGraph) -> bool:
    adj: dict = {}
    for e in g.edges:
        adj.setdefault(e.source, set()).add(e.target)
        adj.setdefault(e.target, set()).add(e.source)
    start = next(iter(g.vertices))
    seen = {start}
    todo = [start]
    while todo:
        for w in adj.get(todo.pop(), ()):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen == set(g.vertices)


def random_splittable(rng: random.Random, **kw) -> QueryGraph:
    while True:
        g = random_graph(rng, **kw)
        if classify(g).splittable:
            return g


def random_unsplittable(rng: random.Random, **kw) -> QueryGraph:
    while True:
        g = random_graph(rng, **kw)
        if not classify(g).splittable:
            return g


def random_strongly_connected(rng: random.Random, max_vertices: int = 5, max_extra: int = 3) -> QueryGraph:
    """A cycle plus a few random extra edges (paths between existing vertices)."""
    while True:
        n = rng.randint(2, max_vertices)
        vs = [f"v{i}" for i in range(n)]
        rng.shuffle(vs)
        edges = [Edge(f"R{i}", vs[i], vs[(i + 1) % n], rng.random() < 0.3) for i in range(n)]
        for j in range(rng.randint(0, max_extra)):
            u, v = rng.sample(vs, 2)
            edges.append(Edge(f"R{n + j}", u, v, rng.random() < 0.3))
        g = QueryGraph(frozenset(vs), tuple(edges))
        if is_strongly_connected(g):
            return g


def random_instance(rng: random.Random, query: Query, domain: int = 3, answers: int = 3,
                    max_groups: int = 10, max_group_size: int = 3, noise: float = 0.5) -> Instance:
    """Plant a few full answers, then add noise tuples to inconsistent relations.

    Constants are ``<variable><index>`` so joins happen often.  Consistent
    relations never receive a second tuple for a key; every relation keeps at
    most ``max_groups`` key-groups of at most ``max_group_size`` tuples.
    """
    variables = query.variables
    rels: dict = {a.name: {} for a in query.atoms}

    def value(v):
        return f"{v}{rng.randrange(domain)}"

    def add(atom: Atom, row: tuple) -> None:
        groups = rels[atom.name]
        key = row[:atom.key_len]
        if key not in groups:
            if len(groups) >= max_groups:
                return
            groups[key] = set()
        g = groups[key]
        if row in g:
            return
        if g and (atom.consistent or len(g) >= max_group_size):
            return
        g.add(row)

    for _ in range(rng.randint(0, answers)):
        binding = {v: value(v) for v in variables}
        for atom in query.atoms:
            add(atom, atom.row_for(binding))
    for atom in query.atoms:
        for _ in range(rng.randint(0, 3)):
            if rng.random() < noise:
                add(atom, tuple(value(t) if isinstance(t, str) else t.value for t in atom.terms))
    return Instance({name: {r for g in groups.values() for r in g} for name, groups in rels.items()})


def random_raw_query(rng: random.Random, max_atoms: int = 4, max_arity: int = 3) -> Query:
    """Atoms of arity 1..3 with single or full keys, occasional constants and repeats."""
    pool = ["x", "y", "z", "w"]
    atoms = []
    for i in range(rng.randint(1, max_atoms)):
        arity = rng.randint(1, max_arity)
        terms = []
        for _ in range(arity):
            r = rng.random()
            if r < 0.12:
                terms.append(ConstTerm(f"x{rng.randrange(2)}"))
            else:
                terms.append(rng.choice(pool))
        all_key = arity > 1 and rng.random() < 0.3
        atoms.append(Atom(f"P{i}", tuple(terms), all_key=all_key, consistent=rng.random() < 0.3))
    return Query(tuple(atoms))


def random_raw_instance(rng: random.Random, query: Query, **kw) -> Instance:
    # the value pools of raw queries are shared across variables on purpose
    inst = random_instance(rng, query, **kw)
    return Instance({name: {tuple(_squash(c) for c in row) for row in rows} for name, rows in inst.items()})


def _squash(c):
    # 'x1', 'y1', 'z1' all become 'x1' so constants collide across attributes
    return f"x{c[-1]}" if isinstance(c, str) and c[-1].isdigit() else c


def graph_query(g: QueryGraph) -> Query:
    return g.to_query()


def check_graph(q: Query) -> QueryGraph:
    return build_query_graph(q)
