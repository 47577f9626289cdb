"""Compressions of frugal answers for strongly connected queries.

The base case handles a directed cycle: frugal repairs pick exactly one k-cycle
inside every SCC of the instance graph that has no longer cycle.  General
strongly connected queries are built from a cycle by adding chordal paths one
at a time; each path is folded in by encoding the current compression as a
longer cycle plus one chord.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import networkx as nx

from .graph import is_strongly_connected
from .model import (RESERVED, Composite, Compression, Edge, Instance, Query, QueryGraph,
                    build_instance_graph, build_query_graph, const_key, eval_full)
from .normalize import is_purified, purify


# --- cycles ---------------------------------------------------------------------

def cycle_order(graph: QueryGraph) -> list:
    """Edges of a simple directed cycle, starting from the smallest edge name."""
    if not graph.edges:
        raise ValueError("empty graph is not a cycle")
    out = {}
    for e in graph.edges:
        if e.source in out:
            raise ValueError("not a simple cycle")
        out[e.source] = e
    first = graph.edges[0]
    order = [first]
    while order[-1].target != first.source:
        nxt = out.get(order[-1].target)
        if nxt is None or nxt in order:
            raise ValueError("not a simple cycle")
        order.append(nxt)
    if len(order) != len(graph.edges):
        raise ValueError("not a simple cycle")
    return order


def long_cycle_check(scc, k: int) -> bool:
    """True iff the (strongly connected) digraph has a cycle of length > k.

    For every simple path u0..uk with k edges, look for a way back from uk to u0
    that avoids u1..u(k-1).
    """
    succ = {v: sorted(set(scc.successors(v)), key=_node_key) for v in scc.nodes}

    def back(src, dst, banned) -> bool:
        seen = {src}
        todo = [src]
        while todo:
            v = todo.pop()
            for w in succ[v]:
                if w == dst:
                    return True
                if w not in seen and w not in banned:
                    seen.add(w)
                    todo.append(w)
        return False

    def extend(path: list) -> bool:
        if len(path) == k + 1:
            return back(path[-1], path[0], set(path[1:-1]))
        for w in succ[path[-1]]:
            if w not in path:
                path.append(w)
                if extend(path):
                    return True
                path.pop()
        return False

    return any(extend([v]) for v in sorted(scc.nodes, key=_node_key))


def _node_key(c):
    return const_key(c)


def frugal_cycle(cycle: Query, instance: Instance) -> Compression:
    """FrugalC: one or-set of k-cycles per instance SCC without a longer cycle."""
    k = len(cycle_order(build_query_graph(cycle)))
    if not is_purified(cycle, instance):
        raise ValueError("frugal_cycle needs an instance purified for the cycle query")
    answers = eval_full(cycle, instance)
    g = build_instance_graph(cycle, instance)
    or_sets = []
    for comp in nx.strongly_connected_components(g):
        sub = g.subgraph(comp)
        if long_cycle_check(sub, k):
            continue
        # every answer is a k-cycle; keep those inside this SCC
        members = frozenset(t for t in answers.tuples if t[0] in comp)
        if members:
            or_sets.append(members)
    return Compression(answers.schema, frozenset(or_sets))


# --- decomposition ------------------------------------------------------------------

@dataclass(frozen=True)
class ChordalDecomposition:
    base: tuple            # edges of the starting cycle, in cycle order
    paths: tuple = ()      # each a tuple of edges from u to v

    def pieces(self) -> list:
        return [self.base] + list(self.paths)


def _shortest_cycle(graph: QueryGraph) -> list:
    best = None
    for start in graph.edges:
        # shortest path from start.target back to start.source
        parent = {start.target: None}
        queue = deque([start.target])
        while queue:
            v = queue.popleft()
            if v == start.source:
                break
            for e in sorted((e for e in graph.edges if e.source == v), key=lambda e: (e.target, e.name)):
                if e.target not in parent:
                    parent[e.target] = e
                    queue.append(e.target)
        if start.source not in parent:
            continue
        path = []
        v = start.source
        while parent[v] is not None:
            path.append(parent[v])
            v = parent[v].source
        cyc = [start] + path[::-1]
        key = (len(cyc), sorted(e.name for e in cyc))
        if best is None or key < best[0]:
            best = (key, cyc)
    if best is None:
        raise ValueError("graph has no cycle")
    cyc = best[1]
    i = min(range(len(cyc)), key=lambda j: cyc[j].name)
    return cyc[i:] + cyc[:i]


def chordal_decomposition(graph: QueryGraph) -> ChordalDecomposition:
    """A shortest cycle, then repeatedly an uncovered edge leaving the covered part,
    extended through uncovered vertices until it re-enters the covered part."""
    if not is_strongly_connected(graph) or not graph.edges:
        raise ValueError("chordal decomposition needs a strongly connected graph with edges")
    base = _shortest_cycle(graph)
    covered_edges = {e.name for e in base}
    covered = {e.source for e in base}
    paths = []
    while len(covered_edges) < len(graph.edges):
        first = min((e for e in graph.edges if e.name not in covered_edges and e.source in covered),
                    key=lambda e: e.name)
        path = [first]
        if first.target not in covered:
            parent = {first.target: None}
            queue = deque([first.target])
            end = None
            while queue and end is None:
                v = queue.popleft()
                for e in sorted((e for e in graph.edges if e.source == v), key=lambda e: (e.target, e.name)):
                    if e.target in covered:
                        end = e
                        break
                    if e.target not in parent:
                        parent[e.target] = e
                        queue.append(e.target)
            tail = [end]
            v = end.source
            while parent[v] is not None:
                tail.append(parent[v])
                v = parent[v].source
            path += tail[::-1]
        paths.append(tuple(path))
        covered_edges |= {e.name for e in path}
        covered |= {e.source for e in path} | {e.target for e in path}
    return ChordalDecomposition(tuple(base), tuple(paths))


def decomposition_violations(graph: QueryGraph, dec: ChordalDecomposition) -> list:
    out = []
    base = dec.base
    if any(base[i].target != base[(i + 1) % len(base)].source for i in range(len(base))) \
            or len({e.source for e in base}) != len(base):
        out.append("base is not a simple cycle")
    covered = {e.source for e in base}
    names = {e.name for e in base}
    for p in dec.paths:
        if any(p[i].target != p[i + 1].source for i in range(len(p) - 1)):
            out.append(f"piece {[e.name for e in p]} is not a path")
        inner = [e.target for e in p[:-1]]
        if len(set(inner)) != len(inner) or any(v in covered for v in inner):
            out.append(f"piece {[e.name for e in p]} is not a chordal path")
        if p[0].source not in covered or p[-1].target not in covered:
            out.append(f"piece {[e.name for e in p]} does not start and end in the covered part")
        if names & {e.name for e in p}:
            out.append("edge used twice")
        names |= {e.name for e in p}
        covered |= {e.source for e in p} | {e.target for e in p}
    if names != set(graph.names):
        out.append("pieces do not cover the graph")
    return out


# --- chords and chordal paths ------------------------------------------------------------

def frugal_chord(compression: Compression, u: str, v: str, rows) -> Compression:
    """Keep the or-sets all of whose tuples satisfy the consistent chord (u, v)."""
    rows = set(rows)
    i, j = compression.schema.index(u), compression.schema.index(v)
    return Compression(compression.schema,
                       frozenset(o for o in compression.or_sets if all((t[i], t[j]) in rows for t in o)))


ORSET_VAR = f"{RESERVED}enc.orset"
TUPLE_VAR = f"{RESERVED}enc.tuple"
B, B1, B2, B0 = (f"{RESERVED}B", f"{RESERVED}B1", f"{RESERVED}B2", f"{RESERVED}B0")


def twin(c):
    return Composite("twin", (c,))


@dataclass
class EncodingTables:
    orset_const: dict          # or-set constant -> or-set (sorted list)
    tup: dict                  # tuple constant -> original tuple
    relations: dict            # B, B1, B2, B0 -> set of rows

    def decode(self, c) -> tuple:
        return self.tup[c]


def encode(compression: Compression, u: str, v: str, twin_end: bool = False) -> EncodingTables:
    """B(a_i, b_ij) plus consistent B1(b_ij, t[u]), B2(b_ij, t[v]), B0(t[v], a_i)."""
    iu, iv = compression.schema.index(u), compression.schema.index(v)
    orsets, tup = {}, {}
    rels: dict = {B: set(), B1: set(), B2: set(), B0: set()}
    for i, members in enumerate(compression.ordered(), start=1):
        a = Composite("orset", (str(i),))
        orsets[a] = members
        for t in members:
            b = Composite("tup", t)
            tup[b] = t
            end = twin(t[iv]) if twin_end else t[iv]
            rels[B].add((a, b))
            rels[B1].add((b, t[iu]))
            rels[B2].add((b, end))
            rels[B0].add((end, a))
    return EncodingTables(orsets, tup, rels)


@dataclass
class ChordPathRun:
    tables: EncodingTables
    cycle: Query
    cycle_instance: Instance
    cycle_compression: Compression
    chord_compression: Compression
    result: Compression


def run_chord_path(compression: Compression, path: tuple, instance: Instance) -> ChordPathRun:
    """FrugalChordPath with every intermediate kept for inspection."""
    u, v = path[0].source, path[-1].target
    inner = [e.target for e in path[:-1]]
    same = u == v
    end = f"{u}{RESERVED}twin" if same else v
    tables = encode(compression, u, v, twin_end=same)
    atoms = [Edge(B, ORSET_VAR, TUPLE_VAR, False).atom(), Edge(B1, TUPLE_VAR, u, True).atom()]
    rels = {name: rows for name, rows in tables.relations.items() if name != B2}
    for i, e in enumerate(path):
        target = end if i == len(path) - 1 else e.target
        atoms.append(Edge(e.name, e.source, target, e.consistent).atom())
        rows = instance[e.name]
        rels[e.name] = {(a, twin(b)) for a, b in rows} if (same and i == len(path) - 1) else rows
    atoms.append(Edge(B0, end, ORSET_VAR, True).atom())
    cycle = Query(tuple(atoms))
    cyc_inst = purify(cycle, Instance(rels))
    cyc_comp = frugal_cycle(cycle, cyc_inst)
    chord = frugal_chord(cyc_comp, TUPLE_VAR, end, tables.relations[B2])
    ib = chord.schema.index(TUPLE_VAR)
    idx = [chord.schema.index(x) for x in inner]
    schema = compression.schema + tuple(inner)
    decoded = Compression(schema, frozenset(
        frozenset(tables.decode(t[ib]) + tuple(t[i] for i in idx) for t in o) for o in chord.or_sets))
    return ChordPathRun(tables, cycle, cyc_inst, cyc_comp, chord, decoded.reorder(sorted(schema)))


def frugal_chord_path(compression: Compression, path: tuple, instance: Instance) -> Compression:
    return run_chord_path(compression, path, instance).result


def frugal_scc(graph: QueryGraph, instance: Instance, runs: list | None = None) -> Compression:
    """FrugalSCC: compress the base cycle, then fold in each chordal path."""
    dec = chordal_decomposition(graph)
    query = graph.to_query()
    if not is_purified(query, instance.restrict(query.names)):
        raise ValueError("frugal_scc needs a purified instance")
    base = Query(tuple(e.atom() for e in dec.base))
    comp = frugal_cycle(base, instance.restrict(base.names))
    for path in dec.paths:
        if len(path) == 1 and path[0].consistent and path[0].source != path[0].target:
            e = path[0]
            comp = frugal_chord(comp, e.source, e.target, instance[e.name])
            continue
        run = run_chord_path(comp, path, instance)
        if runs is not None:
            runs.append(run)
        comp = run.result
    return comp.reorder(sorted(comp.schema))
