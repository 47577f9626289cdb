"""Queries, instances, answer sets and or-set compressions.

Constants are either plain strings or ``Composite`` values (a tag plus a tuple
of constants).  Composite values carry the encodings introduced by the
normalization rewrites and by the chordal-path reduction, so no global
renaming is ever needed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Union

RESERVED = "~"


@dataclass(frozen=True)
class Composite:
    tag: str
    items: tuple = ()

    def __str__(self) -> str:
        return f"{self.tag}[{','.join(str(i) for i in self.items)}]"


Const = Union[str, Composite]


def const_key(c: Const):
    """Total order on constants: tokens before composites, then structurally."""
    if isinstance(c, str):
        return (0, c)
    return (1, c.tag, tuple(const_key(i) for i in c.items))


def row_key(row: tuple):
    return tuple(const_key(c) for c in row)


def const_to_json(c: Const):
    if isinstance(c, str):
        return c
    return {"tag": c.tag, "items": [const_to_json(i) for i in c.items]}


def const_from_json(obj) -> Const:
    if isinstance(obj, str):
        return obj
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return str(obj)
    if isinstance(obj, dict) and set(obj) == {"tag", "items"}:
        return Composite(str(obj["tag"]), tuple(const_from_json(i) for i in obj["items"]))
    raise ValueError(f"not a constant: {obj!r}")


def const_text(c: Const) -> str:
    """Canonical, injective text form of a constant."""
    return json.dumps(const_to_json(c), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


# --- queries -----------------------------------------------------------------

@dataclass(frozen=True)
class ConstTerm:
    """A constant occurring as a term of an atom."""
    value: Const


Term = Union[str, ConstTerm]


@dataclass(frozen=True)
class Atom:
    name: str
    terms: tuple
    all_key: bool = False
    consistent: bool = False

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError(f"atom {self.name} has no terms")
        # a key covering every attribute can never be violated
        if self.all_key or len(self.terms) == 1:
            object.__setattr__(self, "consistent", True)

    @property
    def key_len(self) -> int:
        return len(self.terms) if self.all_key else 1

    @property
    def arity(self) -> int:
        return len(self.terms)

    @property
    def variables(self) -> tuple:
        seen = []
        for t in self.terms:
            if isinstance(t, str) and t not in seen:
                seen.append(t)
        return tuple(seen)

    def is_clean(self) -> bool:
        vs = [t for t in self.terms if isinstance(t, str)]
        return len(vs) == len(self.terms) and len(set(vs)) == len(vs)

    def row_for(self, binding: Mapping[str, Const]) -> tuple:
        return tuple(binding[t] if isinstance(t, str) else t.value for t in self.terms)

    def __str__(self) -> str:
        terms = [t if isinstance(t, str) else repr(str(t.value)) for t in self.terms]
        k = self.key_len
        sup = "^c" if self.consistent and not self.all_key and self.arity > 1 else ""
        return f"{self.name}{sup}(_{','.join(terms[:k])}_{''.join(',' + t for t in terms[k:])})"


def binary(name: str, u: str, v: str, consistent: bool = False) -> Atom:
    return Atom(name, (u, v), consistent=consistent)


@dataclass(frozen=True)
class Query:
    atoms: tuple

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        names = [a.name for a in self.atoms]
        if len(set(names)) != len(names):
            raise ValueError("relation names must be unique within a query (no self-joins)")

    @property
    def variables(self) -> tuple:
        return tuple(sorted({v for a in self.atoms for v in a.variables}))

    @property
    def names(self) -> tuple:
        return tuple(a.name for a in self.atoms)

    def atom(self, name: str) -> Atom:
        for a in self.atoms:
            if a.name == name:
                return a
        raise KeyError(name)

    def is_graph_representable(self) -> bool:
        return all(a.arity == 2 and not a.all_key and a.is_clean() for a in self.atoms)

    def __str__(self) -> str:
        return ", ".join(str(a) for a in self.atoms)


# --- instances -----------------------------------------------------------------

class Instance:
    """Immutable map from relation name to a frozenset of tuples.

    Relations that are absent and relations that are empty are the same thing.
    """

    __slots__ = ("_rels",)

    def __init__(self, relations: Mapping[str, Iterable[tuple]] | None = None):
        rels = {}
        for name, rows in (relations or {}).items():
            rows = frozenset(tuple(r) for r in rows)
            if rows:
                rels[name] = rows
        self._rels = MappingProxyType(rels)

    def __getitem__(self, name: str) -> frozenset:
        return self._rels.get(name, frozenset())

    def __contains__(self, name: str) -> bool:
        return name in self._rels

    def __eq__(self, other) -> bool:
        return isinstance(other, Instance) and dict(self._rels) == dict(other._rels)

    def __hash__(self) -> int:
        return hash(frozenset(self._rels.items()))

    def __repr__(self) -> str:
        return f"Instance({ {k: sorted(v, key=row_key) for k, v in sorted(self._rels.items())} })"

    @property
    def names(self) -> tuple:
        return tuple(sorted(self._rels))

    def items(self):
        return sorted(self._rels.items())

    @property
    def size(self) -> int:
        return sum(len(v) for v in self._rels.values())

    def replace(self, **relations: Iterable[tuple]) -> "Instance":
        return self.update(relations)

    def update(self, relations: Mapping[str, Iterable[tuple]]) -> "Instance":
        rels = dict(self._rels)
        rels.update(relations)
        return Instance(rels)

    def restrict(self, names: Iterable[str]) -> "Instance":
        names = set(names)
        return Instance({k: v for k, v in self._rels.items() if k in names})

    def is_subset(self, other: "Instance") -> bool:
        return all(rows <= other[name] for name, rows in self._rels.items())

    def constants(self) -> set:
        return {c for rows in self._rels.values() for r in rows for c in r}


def key_groups(query: Query, instance: Instance) -> dict:
    """Map (relation, key value) to the frozenset of tuples sharing that key."""
    groups: dict = {}
    for atom in query.atoms:
        k = atom.key_len
        for row in instance[atom.name]:
            groups.setdefault((atom.name, row[:k]), set()).add(row)
    return {g: frozenset(rows) for g, rows in groups.items()}


def check_instance(query: Query, instance: Instance) -> None:
    """Raise ValueError on arity mismatches or violated consistency declarations."""
    for atom in query.atoms:
        for row in instance[atom.name]:
            if len(row) != atom.arity:
                raise ValueError(f"relation {atom.name}: tuple {row} has arity {len(row)}, expected {atom.arity}")
    for (name, key), rows in key_groups(query, instance).items():
        if query.atom(name).consistent and len(rows) > 1:
            raise ValueError(f"relation {name} is declared consistent but key {key} has {len(rows)} tuples")
    extra = set(instance.names) - set(query.names)
    if extra:
        raise ValueError(f"instance has relations not in the query: {sorted(extra)}")


def is_repair_of(query: Query, repair: Instance, instance: Instance) -> bool:
    if not repair.is_subset(instance):
        return False
    sub = key_groups(query, repair)
    full = key_groups(query, instance)
    return set(sub) == set(full) and all(len(rows) == 1 for rows in sub.values())


# --- answers and compressions ---------------------------------------------------

@dataclass(frozen=True)
class AnswerSet:
    schema: tuple
    tuples: frozenset

    def __bool__(self) -> bool:
        return bool(self.tuples)

    def __len__(self) -> int:
        return len(self.tuples)

    def __iter__(self) -> Iterator[tuple]:
        return iter(sorted(self.tuples, key=row_key))

    def bindings(self) -> Iterator[dict]:
        for row in self:
            yield dict(zip(self.schema, row))

    def project(self, variables: Iterable[str]) -> frozenset:
        idx = [self.schema.index(v) for v in variables]
        return frozenset(tuple(row[i] for i in idx) for row in self.tuples)


def _join_order(atoms: tuple) -> list:
    remaining = list(atoms)
    order = []
    bound: set = set()
    while remaining:
        nxt = next((a for a in remaining if bound & set(a.variables)), remaining[0])
        remaining.remove(nxt)
        order.append(nxt)
        bound |= set(nxt.variables)
    return order


def eval_full(query: Query, instance: Instance) -> AnswerSet:
    """The full query: natural join of all atoms, projected on every variable."""
    schema = query.variables
    rows: list = [{}]
    for atom in _join_order(query.atoms):
        if not rows:
            break
        bound = set(rows[0])
        probe = [i for i, t in enumerate(atom.terms) if not isinstance(t, str) or t in bound]
        index: dict = {}
        for tup in instance[atom.name]:
            if len(tup) != atom.arity:
                raise ValueError(f"relation {atom.name}: tuple {tup} does not match arity {atom.arity}")
            index.setdefault(tuple(tup[i] for i in probe), []).append(tup)
        out = []
        for b in rows:
            key = tuple(b[t] if isinstance(t, str) else t.value for t in (atom.terms[i] for i in probe))
            for tup in index.get(key, ()):
                nb = dict(b)
                ok = True
                for t, c in zip(atom.terms, tup):
                    if isinstance(t, str):
                        if nb.setdefault(t, c) != c:
                            ok = False
                            break
                if ok:
                    out.append(nb)
        rows = out
    return AnswerSet(schema, frozenset(tuple(b[v] for v in schema) for b in rows))


def holds(query: Query, instance: Instance) -> bool:
    return bool(eval_full(query, instance))


def _disjoint_coordinates(a: frozenset, b: frozenset, width: int) -> bool:
    return all({t[i] for t in a}.isdisjoint({t[i] for t in b}) for i in range(width))


@dataclass(frozen=True)
class Compression:
    """A set of coordinate-disjoint or-sets over an explicit schema."""
    schema: tuple
    or_sets: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "schema", tuple(self.schema))
        object.__setattr__(self, "or_sets", frozenset(frozenset(map(tuple, o)) for o in self.or_sets))

    def __len__(self) -> int:
        return len(self.or_sets)

    def __bool__(self) -> bool:
        return bool(self.or_sets)

    def ordered(self) -> list:
        """Or-sets as sorted lists, sorted by their smallest tuple."""
        lists = [sorted(o, key=row_key) for o in self.or_sets]
        return sorted(lists, key=lambda o: [row_key(t) for t in o])

    def tuples(self) -> set:
        return {t for o in self.or_sets for t in o}

    def violations(self) -> list:
        """Describe every broken invariant (empty list means valid)."""
        out = []
        width = len(self.schema)
        for o in self.or_sets:
            if not o:
                out.append("empty or-set")
            for t in o:
                if len(t) != width:
                    out.append(f"tuple {t} does not match schema {self.schema}")
        sets = self.ordered()
        for i, a in enumerate(sets):
            for b in sets[i + 1:]:
                if not _disjoint_coordinates(frozenset(a), frozenset(b), width):
                    out.append(f"or-sets {a} and {b} share a constant in some coordinate")
        return out

    def expand(self) -> frozenset:
        """The alpha expansion: every way of picking one tuple per or-set."""
        return frozenset(frozenset(choice) for choice in product(*self.ordered()))

    def reorder(self, schema: Iterable[str]) -> "Compression":
        schema = tuple(schema)
        if sorted(schema) != sorted(self.schema):
            raise ValueError(f"schema {schema} is not a permutation of {self.schema}")
        idx = [self.schema.index(v) for v in schema]
        return Compression(schema, frozenset(frozenset(tuple(t[i] for i in idx) for t in o) for o in self.or_sets))

    def to_json(self) -> dict:
        return {
            "schema": list(self.schema),
            "or_sets": [[[const_to_json(c) for c in t] for t in o] for o in self.ordered()],
        }

    @staticmethod
    def from_json(obj) -> "Compression":
        return Compression(
            tuple(obj["schema"]),
            frozenset(frozenset(tuple(const_from_json(c) for c in t) for t in o) for o in obj["or_sets"]),
        )


# --- query graphs and instance graphs ---------------------------------------------

@dataclass(frozen=True)
class Edge:
    name: str
    source: str
    target: str
    consistent: bool

    def atom(self) -> Atom:
        return binary(self.name, self.source, self.target, self.consistent)


@dataclass(frozen=True)
class QueryGraph:
    """Vertices are variables; each binary atom R(u, v) is an edge u -> v named R."""
    vertices: frozenset
    edges: tuple  # of Edge, sorted by name

    def __post_init__(self):
        edges = tuple(sorted(self.edges, key=lambda e: e.name))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        names = [e.name for e in edges]
        if len(set(names)) != len(names):
            raise ValueError("duplicate edge names")
        for e in edges:
            if e.source not in self.vertices or e.target not in self.vertices:
                raise ValueError(f"edge {e.name} has an endpoint outside the vertex set")

    def edge(self, name: str) -> Edge:
        for e in self.edges:
            if e.name == name:
                return e
        raise KeyError(f"unknown edge {name}")

    @property
    def names(self) -> tuple:
        return tuple(e.name for e in self.edges)

    @property
    def inconsistent(self) -> tuple:
        return tuple(e.name for e in self.edges if not e.consistent)

    @property
    def consistent(self) -> tuple:
        return tuple(e.name for e in self.edges if e.consistent)

    def to_query(self) -> Query:
        return Query(tuple(e.atom() for e in self.edges))

    def retype(self, names: Iterable[str], consistent: bool = True) -> "QueryGraph":
        names = set(names)
        return QueryGraph(self.vertices, tuple(
            Edge(e.name, e.source, e.target, consistent) if e.name in names else e for e in self.edges))

    def add_edge(self, edge: Edge) -> "QueryGraph":
        return QueryGraph(self.vertices | {edge.source, edge.target}, self.edges + (edge,))

    def induced(self, vertices: Iterable[str]) -> "QueryGraph":
        vs = frozenset(vertices)
        return QueryGraph(vs, tuple(e for e in self.edges if e.source in vs and e.target in vs))

    def sub(self, names: Iterable[str]) -> "QueryGraph":
        names = set(names)
        es = tuple(e for e in self.edges if e.name in names)
        return QueryGraph(frozenset(v for e in es for v in (e.source, e.target)), es)


def build_query_graph(query: Query) -> QueryGraph:
    if not query.is_graph_representable():
        bad = [str(a) for a in query.atoms if not (a.arity == 2 and not a.all_key and a.is_clean())]
        raise ValueError(f"query is not graph-representable (offending atoms: {', '.join(bad)}); run normalize first")
    edges = tuple(Edge(a.name, a.terms[0], a.terms[1], a.consistent) for a in query.atoms)
    return QueryGraph(frozenset(query.variables), edges)


def build_instance_graph(query: Query, instance: Instance):
    """Directed multigraph with one edge per tuple, keyed by relation name."""
    import networkx as nx

    g = nx.MultiDiGraph()
    for atom in query.atoms:
        for a, b in instance[atom.name]:
            g.add_edge(a, b, key=atom.name)
    return g
