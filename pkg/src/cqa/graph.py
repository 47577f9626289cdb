"""Closures, equivalence classes, coupled sets, classification, separators and F-Closure."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import networkx as nx

from .model import RESERVED, Edge, Instance, Query, QueryGraph, eval_full

CONSISTENT = "oplus"   # consistent edges only
ALL = "plus"           # every edge
WITHOUT = "plus_minus"  # every edge except the one named


def _reach(graph: QueryGraph, start: str, usable) -> frozenset:
    if start not in graph.vertices:
        raise KeyError(f"unknown vertex {start}")
    out: dict = {}
    for e in graph.edges:
        if usable(e):
            out.setdefault(e.source, []).append(e.target)
    seen = {start}
    todo = [start]
    while todo:
        for w in out.get(todo.pop(), ()):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return frozenset(seen)


def closure(graph: QueryGraph, vertex: str, variant: str = ALL, edge: str | None = None) -> frozenset:
    """Vertices reachable from ``vertex`` (always including it) under an edge filter."""
    if variant == CONSISTENT:
        return _reach(graph, vertex, lambda e: e.consistent)
    if variant == ALL:
        return _reach(graph, vertex, lambda e: True)
    if variant == WITHOUT:
        if edge is None:
            raise ValueError("the plus-minus closure needs an edge")
        graph.edge(edge)
        return _reach(graph, vertex, lambda e: e.name != edge)
    raise ValueError(f"unknown closure variant {variant!r}")


def oplus(graph: QueryGraph, vertex: str) -> frozenset:
    return closure(graph, vertex, CONSISTENT)


def plus(graph: QueryGraph, vertex: str) -> frozenset:
    return closure(graph, vertex, ALL)


def plus_without(graph: QueryGraph, name: str) -> frozenset:
    """Closure of an edge's source, avoiding the edge itself."""
    return closure(graph, graph.edge(name).source, WITHOUT, name)


def source_le(graph: QueryGraph, r: str, s: str) -> bool:
    """The preorder R <= S: the source of S is reachable from the source of R."""
    return graph.edge(s).source in plus(graph, graph.edge(r).source)


def _nx(graph: QueryGraph) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(sorted(graph.vertices))
    g.add_edges_from((e.source, e.target) for e in graph.edges)
    return g


def scc_of(graph: QueryGraph) -> dict:
    """Vertex -> frozenset of the vertices in its strongly connected component."""
    comp = {}
    for c in nx.strongly_connected_components(_nx(graph)):
        c = frozenset(c)
        for v in c:
            comp[v] = c
    return comp


def is_strongly_connected(graph: QueryGraph) -> bool:
    return bool(graph.vertices) and nx.is_strongly_connected(_nx(graph))


def equivalent(graph: QueryGraph, r: str, s: str) -> bool:
    comp = scc_of(graph)
    return comp[graph.edge(r).source] == comp[graph.edge(s).source]


@dataclass(frozen=True, order=True)
class EqClass:
    """Inconsistent edges whose sources share a strongly connected component."""
    edges: tuple
    scc: frozenset = field(compare=False)

    @property
    def id(self) -> str:
        return "{" + ",".join(self.edges) + "}"

    def __contains__(self, name: str) -> bool:
        return name in self.edges

    def __str__(self) -> str:
        return self.id


def eq_classes(graph: QueryGraph) -> list:
    comp = scc_of(graph)
    groups: dict = {}
    for name in graph.inconsistent:
        groups.setdefault(comp[graph.edge(name).source], []).append(name)
    return sorted(EqClass(tuple(sorted(ns)), scc) for scc, ns in groups.items())


def class_of(graph: QueryGraph, name: str, classes: Iterable[EqClass] | None = None) -> EqClass:
    for c in classes if classes is not None else eq_classes(graph):
        if name in c:
            return c
    raise KeyError(f"{name} is not an inconsistent edge")


def class_plus(graph: QueryGraph, cls: EqClass) -> frozenset:
    return frozenset.intersection(*(plus_without(graph, r) for r in cls.edges))


def class_oplus(graph: QueryGraph, cls: EqClass) -> frozenset:
    return frozenset.intersection(*(oplus(graph, graph.edge(r).source) for r in cls.edges))


def _component(graph: QueryGraph, start: str, blocked: frozenset) -> frozenset:
    """Weakly connected component of ``start`` once ``blocked`` vertices are deleted."""
    if start in blocked:
        return frozenset()
    adj: dict = {}
    for e in graph.edges:
        if e.source in blocked or e.target in blocked:
            continue
        adj.setdefault(e.source, []).append(e.target)
        adj.setdefault(e.target, []).append(e.source)
    seen = {start}
    todo = [start]
    while todo:
        for w in adj.get(todo.pop(), ()):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return frozenset(seen)


def coupled(graph: QueryGraph, name: str, variant: str = ALL) -> frozenset:
    """Edge-level coupled set: [R] plus every S whose source meets the target of R
    by an undirected path avoiding the blocking closure of R."""
    e = graph.edge(name)
    if e.consistent:
        raise ValueError(f"{name} is consistent")
    blocked = plus_without(graph, name) if variant == ALL else oplus(graph, e.source)
    reach = _component(graph, e.target, blocked)
    comp = scc_of(graph)
    same = {s for s in graph.inconsistent if comp[graph.edge(s).source] == comp[e.source]}
    return frozenset(same | {s for s in graph.inconsistent if graph.edge(s).source in reach})


def coupled_classes(graph: QueryGraph, cls: EqClass, variant: str = CONSISTENT,
                    classes: Iterable[EqClass] | None = None) -> frozenset:
    """Class-level coupled set, blocking with the class closure C+ or C-oplus."""
    classes = list(classes) if classes is not None else eq_classes(graph)
    blocked = class_plus(graph, cls) if variant == ALL else class_oplus(graph, cls)
    reach: set = set()
    for r in cls.edges:
        reach |= _component(graph, graph.edge(r).target, blocked)
    return frozenset({cls} | {c for c in classes
                              if any(graph.edge(s).source in reach for s in c.edges)})


@dataclass(frozen=True)
class Classification:
    splittable: bool
    witness: tuple | None = None  # coupled (R, S) with R, S not source-equivalent

    @property
    def verdict(self) -> str:
        return "PTIME" if self.splittable else "coNP-complete"


def coupled_pairs(graph: QueryGraph) -> list:
    """All coupled, non-equivalent pairs (R, S) with R < S by name."""
    table = {r: coupled(graph, r, ALL) for r in graph.inconsistent}
    comp = scc_of(graph)
    pairs = []
    names = graph.inconsistent
    for i, r in enumerate(names):
        for s in names[i + 1:]:
            if s in table[r] and r in table[s] and comp[graph.edge(r).source] != comp[graph.edge(s).source]:
                pairs.append((r, s))
    return pairs


def classify(graph: QueryGraph) -> Classification:
    pairs = coupled_pairs(graph)
    if pairs:
        return Classification(False, pairs[0])
    return Classification(True)


@dataclass(frozen=True)
class ClassOrder:
    classes: tuple
    le: frozenset  # pairs (C1, C2) with C1 <=oplus C2, C1 != C2

    def lt(self, a: EqClass, b: EqClass) -> bool:
        return a != b and (a, b) in self.le

    @property
    def sinks(self) -> tuple:
        return tuple(c for c in self.classes if not any(self.lt(c, d) for d in self.classes))


def class_order(graph: QueryGraph, classes: Iterable[EqClass] | None = None) -> ClassOrder:
    """C1 <=oplus C2 iff some edge S of C2 has its source in C1-oplus."""
    classes = tuple(classes) if classes is not None else tuple(eq_classes(graph))
    le = set()
    for a in classes:
        reach = class_oplus(graph, a)
        for b in classes:
            if a != b and any(graph.edge(s).source in reach for s in b.edges):
                le.add((a, b))
    return ClassOrder(classes, frozenset(le))


def is_separator(graph: QueryGraph, cls: EqClass, order: ClassOrder | None = None) -> bool:
    order = order or class_order(graph)
    if cls not in order.sinks:
        return False
    return all(order.lt(other, cls) for other in coupled_classes(graph, cls, CONSISTENT, order.classes)
               if other != cls)


def find_separator(graph: QueryGraph) -> EqClass:
    order = class_order(graph)
    if not order.classes:
        raise ValueError("graph has no inconsistent edges")
    sizes = {c: len(coupled_classes(graph, c, CONSISTENT, order.classes)) for c in order.sinks}
    best = min(sizes, key=lambda c: (sizes[c], c.edges))
    if not is_separator(graph, best, order):
        raise RuntimeError(f"class {best} is not a separator; is the graph splittable and f-closed?")
    return best


# --- F-Closure ----------------------------------------------------------------

def f_violation(graph: QueryGraph) -> tuple | None:
    """First (R, v) with v reachable consistently from v_R and from u_R without R,
    but not consistently from u_R."""
    for r in graph.inconsistent:
        e = graph.edge(r)
        bad = (oplus(graph, e.target) & plus_without(graph, r)) - oplus(graph, e.source)
        if bad:
            return r, min(bad)
    return None


def is_f_closed(graph: QueryGraph) -> bool:
    return f_violation(graph) is None


def consistent_path(graph: QueryGraph, start: str, goal: str) -> list:
    """Shortest path of consistent edges; neighbours explored in (vertex, edge) name order."""
    out: dict = {}
    for e in graph.edges:
        if e.consistent:
            out.setdefault(e.source, []).append(e)
    for v in out:
        out[v].sort(key=lambda e: (e.target, e.name))
    parent: dict = {start: None}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        if v == goal:
            break
        for e in out.get(v, ()):
            if e.target not in parent:
                parent[e.target] = e
                queue.append(e.target)
    if goal not in parent:
        raise ValueError(f"no consistent path from {start} to {goal}")
    path = []
    v = goal
    while parent[v] is not None:
        path.append(parent[v])
        v = parent[v].source
    return path[::-1]


def closure_edge_name(r: str, v: str) -> str:
    return f"{r}{RESERVED}fc{RESERVED}{v}"


def f_close_graph(graph: QueryGraph) -> QueryGraph:
    """The graph part of F-Closure, without any instance."""
    while (hit := f_violation(graph)) is not None:
        r, v = hit
        graph = graph.add_edge(Edge(closure_edge_name(r, v), graph.edge(r).source, v, True))
    return graph


def f_closure(graph: QueryGraph, instance: Instance, trace: list | None = None):
    """Make the graph f-closed, adding one consistent relation per repaired violation."""
    while (hit := f_violation(graph)) is not None:
        r, v = hit
        e = graph.edge(r)
        path = [e] + consistent_path(graph, e.target, v)
        answers = eval_full(Query(tuple(p.atom() for p in path)), instance)
        pairs = answers.project((e.source, v))
        targets: dict = {}
        for a, b in pairs:
            targets.setdefault(a, set()).add(b)
        rows = {(a, next(iter(bs))) for a, bs in targets.items() if len(bs) == 1}
        name = closure_edge_name(r, v)
        graph = graph.add_edge(Edge(name, e.source, v, True))
        instance = instance.update({name: rows})
        if trace is not None:
            trace.append({"violation": [r, v], "path": [p.name for p in path], "added": name,
                          "kept_keys": len(rows), "dropped_keys": len(targets) - len(rows)})
    return graph, instance


def classification_report(graph: QueryGraph) -> dict:
    """JSON-ready summary: verdict, witness, coupled tables, class order, sinks, separator."""
    c = classify(graph)
    classes = eq_classes(graph)
    report: dict = {
        "verdict": c.verdict,
        "splittable": c.splittable,
        "witness": list(c.witness) if c.witness else None,
        "coupled_plus": {r: sorted(coupled(graph, r, ALL)) for r in graph.inconsistent},
        "coupled_oplus": {r: sorted(coupled(graph, r, CONSISTENT)) for r in graph.inconsistent},
        "classes": [list(k.edges) for k in classes],
    }
    if c.splittable and classes:
        closed = f_close_graph(graph)
        order = class_order(closed, eq_classes(closed))
        report["class_order"] = sorted([list(a.edges), list(b.edges)] for a, b in order.le)
        report["sinks"] = [list(k.edges) for k in order.sinks]
        report["separator"] = list(find_separator(closed).edges)
        if closed != graph:
            report["closure_edges"] = [e.name for e in closed.edges if e.name not in graph.names]
    return report
