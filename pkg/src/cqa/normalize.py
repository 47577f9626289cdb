"""Rewrite arbitrary in-scope queries and instances into graph-representable form.

Every rewrite preserves certainty.  Fresh names contain the reserved character
``~`` followed or preceded by the relation they come from, so user relations and
variables may not contain it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .model import (RESERVED, Atom, Composite, ConstTerm, Instance, Query, check_instance,
                    eval_full, holds, key_groups)


@dataclass(frozen=True)
class TraceStep:
    rule: str
    relation: str
    fresh: tuple = ()

    def to_json(self) -> dict:
        return {"rule": self.rule, "relation": self.relation, "fresh": list(self.fresh)}


@dataclass(frozen=True)
class Component:
    query: Query
    instance: Instance
    decided: bool | None = None  # set for components made only of unary atoms


@dataclass
class NormalForm:
    components: list
    trace: list = field(default_factory=list)

    @property
    def query(self) -> Query:
        return Query(tuple(a for c in self.components for a in c.query.atoms))


def _drop_groups(atom: Atom, rows: frozenset, bad) -> set:
    """Delete every key-group of ``atom`` that contains a row flagged by ``bad``."""
    k = atom.key_len
    doomed = {r[:k] for r in rows if bad(r)}
    return {r for r in rows if r[:k] not in doomed}


# --- constants and repeated variables --------------------------------------------

def _clean_atom(atom: Atom) -> Atom:
    seen = set()
    terms = []
    for i, t in enumerate(atom.terms):
        if isinstance(t, str) and t not in seen:
            seen.add(t)
            terms.append(t)
        else:
            terms.append(f"{RESERVED}{atom.name}.{i}")
    return Atom(atom.name, tuple(terms), atom.all_key, atom.consistent)


def _matches(atom: Atom):
    first: dict = {}
    checks = []
    for i, t in enumerate(atom.terms):
        if isinstance(t, ConstTerm):
            checks.append((i, None, t.value))
        elif t in first:
            checks.append((i, first[t], None))
        else:
            first[t] = i

    def ok(row: tuple) -> bool:
        return all(row[i] == (value if j is None else row[j]) for i, j, value in checks)
    return ok


def eliminate_constants_duplicates(query: Query, instance: Instance, trace: list | None = None):
    """Replace constants and repeated variables by fresh variables.

    A key-group that holds some tuple breaking the atom's pattern is deleted
    whole: a repair may pick the breaking tuple, so the group can never be
    relied on to produce an answer.
    """
    atoms = []
    rels = {}
    for atom in query.atoms:
        if atom.is_clean():
            atoms.append(atom)
            continue
        new = _clean_atom(atom)
        ok = _matches(atom)
        rels[atom.name] = _drop_groups(atom, instance[atom.name], lambda r: not ok(r))
        atoms.append(new)
        if trace is not None:
            fresh = tuple(t for t, old in zip(new.terms, atom.terms) if t != old)
            trace.append(TraceStep("eliminate_constants_duplicates", atom.name, fresh))
    return Query(tuple(atoms)), instance.update(rels)


# --- all-key atoms -----------------------------------------------------------------

def _allkey_atoms(atom: Atom) -> tuple:
    w = f"{RESERVED}{atom.name}"
    return tuple(Atom(f"{atom.name}{RESERVED}{i}", (w, x), consistent=True)
                 for i, x in enumerate(atom.terms, start=1))


def expand_all_key(query: Query, instance: Instance, trace: list | None = None):
    """R(x1..xk) with every attribute in the key becomes R~i(w, xi) for i = 1..k."""
    atoms = []
    rels = dict((n, r) for n, r in instance.items())
    for atom in query.atoms:
        if not (atom.all_key and atom.arity >= 2):
            atoms.append(atom)
            continue
        parts = _allkey_atoms(atom)
        atoms.extend(parts)
        rows = rels.pop(atom.name, frozenset())
        for i, part in enumerate(parts):
            rels[part.name] = {(Composite("row", row), row[i]) for row in rows}
        if trace is not None:
            trace.append(TraceStep("expand_all_key", atom.name, (parts[0].terms[0],) + tuple(p.name for p in parts)))
    return Query(tuple(atoms)), Instance(rels)


# --- wide single-key atoms -----------------------------------------------------------

def _wide_atoms(atom: Atom) -> tuple:
    y = f"{RESERVED}{atom.name}"
    head = Atom(atom.name, (atom.terms[0], y), consistent=atom.consistent)
    return (head,) + tuple(Atom(f"{atom.name}{RESERVED}{i}", (y, x), consistent=True)
                           for i, x in enumerate(atom.terms[1:], start=1))


def decompose_wide(query: Query, instance: Instance, trace: list | None = None):
    """R(x, y1..yk) with k >= 2 becomes R(x, y) plus consistent R~i(y, yi)."""
    atoms = []
    rels = dict((n, r) for n, r in instance.items())
    for atom in query.atoms:
        if atom.all_key or atom.arity <= 2:
            atoms.append(atom)
            continue
        parts = _wide_atoms(atom)
        atoms.extend(parts)
        rows = rels.pop(atom.name, frozenset())
        rels[atom.name] = {(row[0], Composite("row", row[1:])) for row in rows}
        for i, part in enumerate(parts[1:], start=1):
            rels[part.name] = {(Composite("row", row[1:]), row[i]) for row in rows}
        if trace is not None:
            trace.append(TraceStep("decompose_wide", atom.name, (parts[0].terms[1],) + tuple(p.name for p in parts[1:])))
    return Query(tuple(atoms)), Instance(rels)


# --- unary atoms --------------------------------------------------------------------

class UnaryOnlyQuery(ValueError):
    pass


def remove_unary(query: Query, instance: Instance, trace: list | None = None):
    """Drop unary atoms after deleting the key-groups they would rule out."""
    unary = [a for a in query.atoms if a.arity == 1]
    if not unary:
        return query, instance
    others = [a for a in query.atoms if a.arity > 1]
    if not others:
        raise UnaryOnlyQuery("query consists solely of unary atoms; evaluate it directly")
    rels = {a.name: set(instance[a.name]) for a in others}
    for u in unary:
        x = u.terms[0]
        allowed = {row[0] for row in instance[u.name]}
        users = [a for a in others if x in a.terms]
        if not users:
            raise UnaryOnlyQuery(f"variable {x} occurs only in unary atoms; split components first")
        for a in users:
            pos = [i for i, t in enumerate(a.terms) if t == x]
            rels[a.name] = _drop_groups(a, frozenset(rels[a.name]), lambda r: any(r[i] not in allowed for i in pos))
        if trace is not None:
            trace.append(TraceStep("remove_unary", u.name))
    kept = Instance({n: r for n, r in instance.items() if n not in {u.name for u in unary}})
    return Query(tuple(others)), kept.update(rels)


# --- components, domains, purification --------------------------------------------------

def split_components(query: Query) -> list:
    """Partition atoms by weak connectivity through shared variables."""
    parent = list(range(len(query.atoms)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict = {}
    for i, atom in enumerate(query.atoms):
        for v in atom.variables:
            if v in owner:
                parent[find(i)] = find(owner[v])
            else:
                owner[v] = i
    groups: dict = {}
    for i, atom in enumerate(query.atoms):
        groups.setdefault(find(i), []).append(atom)
    return [Query(tuple(g)) for g in groups.values()]


def rename_domains(query: Query, instance: Instance) -> Instance:
    """Tag constants that occur under more than one variable with that variable.

    Afterwards distinct variables have disjoint active domains; positions of the
    same variable keep sharing their constants.
    """
    seen: dict = {}
    for atom in query.atoms:
        for row in instance[atom.name]:
            for t, c in zip(atom.terms, row):
                seen.setdefault(c, set()).add(t)
    clash = {c for c, vs in seen.items() if len(vs) > 1}
    if not clash:
        return instance
    rels = {}
    for atom in query.atoms:
        rels[atom.name] = {tuple(Composite("at", (t, c)) if c in clash else c for t, c in zip(atom.terms, row))
                           for row in instance[atom.name]}
    return instance.update(rels)


def purify(query: Query, instance: Instance) -> Instance:
    """Delete whole key-groups holding a tuple that joins into no full answer, to a fixpoint."""
    instance = instance.restrict(query.names)
    while True:
        answers = eval_full(query, instance)
        rels = {}
        changed = False
        for atom in query.atoms:
            used = {atom.row_for(b) for b in answers.bindings()}
            rows = instance[atom.name]
            if rows - used:
                rels[atom.name] = _drop_groups(atom, rows, lambda r: r not in used)
                changed = True
        if not changed:
            return instance
        instance = instance.update(rels)


def is_purified(query: Query, instance: Instance) -> bool:
    return purify(query, instance) == instance.restrict(query.names) and set(instance.names) <= set(query.names)


# --- the pipeline ---------------------------------------------------------------------

def _check_names(query: Query) -> None:
    for atom in query.atoms:
        if RESERVED in atom.name or any(isinstance(t, str) and RESERVED in t for t in atom.terms):
            raise ValueError(f"names may not contain {RESERVED!r}: {atom}")


def normalize(query: Query, instance: Instance) -> NormalForm:
    """Full pipeline; each returned component is graph-representable and purified
    unless it consisted only of unary atoms, in which case it is decided directly."""
    _check_names(query)
    check_instance(query, instance)
    trace: list = []
    q, inst = eliminate_constants_duplicates(query, instance, trace)
    q, inst = expand_all_key(q, inst, trace)
    q, inst = decompose_wide(q, inst, trace)
    parts = split_components(q)
    if len(parts) > 1:
        trace.append(TraceStep("split_components", "", tuple(",".join(p.names) for p in parts)))
    out = []
    for part in parts:
        sub = inst.restrict(part.names)
        if all(a.arity == 1 for a in part.atoms):
            out.append(Component(part, sub, holds(part, sub)))
            continue
        part, sub = remove_unary(part, sub, trace)
        sub = rename_domains(part, sub)
        sub = purify(part, sub)
        out.append(Component(part, sub))
    return NormalForm(out, trace)


def replay(query: Query, trace: list) -> Query:
    """Apply the query side of a trace to the original query."""
    atoms = list(query.atoms)

    def at(name):
        return next(i for i, a in enumerate(atoms) if a.name == name)

    for step in trace:
        if step.rule == "eliminate_constants_duplicates":
            i = at(step.relation)
            atoms[i] = _clean_atom(atoms[i])
        elif step.rule == "expand_all_key":
            i = at(step.relation)
            atoms[i:i + 1] = _allkey_atoms(atoms[i])
        elif step.rule == "decompose_wide":
            i = at(step.relation)
            atoms[i:i + 1] = _wide_atoms(atoms[i])
        elif step.rule == "remove_unary":
            del atoms[at(step.relation)]
    return Query(tuple(atoms))


def normalize_query(query: Query) -> list:
    """Graph-representable components of a query (instance-independent part of the pipeline)."""
    return [c.query for c in normalize(query, Instance()).components]


def inconsistent_group_count(query: Query, instance: Instance) -> int:
    return sum(1 for rows in key_groups(query, instance).values() if len(rows) > 1)
