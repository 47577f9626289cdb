"""Brute-force ground truth: repairs, certainty, frugal families, and the solve dispatcher."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations, product
from math import prod
from typing import Iterator

from .model import (AnswerSet, Compression, Instance, Query, eval_full, key_groups,
                    row_key)

DEFAULT_BOUND = 10 ** 6


class BoundExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class RepairSpace:
    """Key-groups in lexicographic order, each with its sorted tuple choices."""
    groups: tuple  # of ((relation, key), (tuple, ...))

    @property
    def count(self) -> int:
        return prod(len(choices) for _, choices in self.groups)


def repair_space(query: Query, instance: Instance) -> RepairSpace:
    groups = key_groups(query, instance)
    ordered = sorted(groups, key=lambda g: (g[0], row_key(g[1])))
    return RepairSpace(tuple((g, tuple(sorted(groups[g], key=row_key))) for g in ordered))


def enumerate_repairs(query: Query, instance: Instance, bound: int = DEFAULT_BOUND) -> Iterator[Instance]:
    space = repair_space(query, instance)
    if space.count > bound:
        raise BoundExceeded(f"{space.count} repairs exceed the bound {bound}")
    names = [g[0] for g, _ in space.groups]
    for choice in product(*(choices for _, choices in space.groups)):
        rels: dict = {}
        for name, row in zip(names, choice):
            rels.setdefault(name, []).append(row)
        yield Instance(rels)


def certain_naive(query: Query, instance: Instance, bound: int = DEFAULT_BOUND) -> bool:
    """Evaluate the query on every repair."""
    return all(eval_full(query, r) for r in enumerate_repairs(query, instance, bound))


@dataclass
class Witnesses:
    """Each full-query answer together with the tuple it needs from each key-group."""
    answers: AnswerSet
    needs: list = field(default_factory=list)   # per answer: {group: tuple}
    domains: dict = field(default_factory=dict)  # group -> sorted tuple choices


def witnesses(query: Query, instance: Instance) -> Witnesses:
    answers = eval_full(query, instance)
    groups = key_groups(query, instance)
    w = Witnesses(answers)
    for binding in answers.bindings():
        need = {}
        for atom in query.atoms:
            row = atom.row_for(binding)
            need[(atom.name, row[:atom.key_len])] = row
        w.needs.append(need)
    used = {g for need in w.needs for g in need}
    w.domains = {g: tuple(sorted(groups[g], key=row_key)) for g in sorted(used, key=lambda g: (g[0], row_key(g[1])))}
    return w


def falsifying_repair(query: Query, instance: Instance, bound: int = DEFAULT_BOUND) -> dict | None:
    """Search for a choice of one tuple per key-group under which no answer survives.

    Only key-groups used by some answer matter.  The search assigns those groups
    one at a time; an answer is dead once one of its groups picks another tuple.
    Whenever a live answer has a single unassigned group left, that group is
    forbidden from picking the answer's tuple.  Returns the choice (group -> tuple)
    for the relevant groups, or None when every repair satisfies the query.
    """
    w = witnesses(query, instance)
    if not w.needs:
        return {}
    by_group: dict = {g: [] for g in w.domains}
    for i, need in enumerate(w.needs):
        for g in need:
            by_group[g].append(i)
    nodes = 0

    def search(assigned: dict, allowed: dict):
        nonlocal nodes
        nodes += 1
        if nodes > bound:
            raise BoundExceeded(f"search exceeded {bound} nodes")
        open_groups = [g for g in w.domains if g not in assigned]
        if not open_groups:
            return dict(assigned)
        g = min(open_groups, key=lambda h: (len(allowed[h]), open_groups.index(h)))
        for row in allowed[g]:
            assigned[g] = row
            nxt = {h: list(v) for h, v in allowed.items() if h not in assigned}
            ok = True
            for i in by_group[g]:
                need = w.needs[i]
                if need[g] != row or any(assigned.get(h, need[h]) != need[h] for h in need):
                    continue
                rest = [h for h in need if h not in assigned]
                if not rest:
                    ok = False
                    break
                if len(rest) == 1:
                    h = rest[0]
                    if need[h] in nxt[h]:
                        nxt[h].remove(need[h])
                    if not nxt[h]:
                        ok = False
                        break
            if ok:
                found = search(assigned, nxt)
                if found is not None:
                    return found
            del assigned[g]
        return None

    allowed = {g: list(choices) for g, choices in w.domains.items()}
    # answers living in a single group forbid that tuple outright
    for need in w.needs:
        if len(need) == 1:
            (g, row), = need.items()
            if row in allowed[g]:
                allowed[g].remove(row)
    if any(not v for v in allowed.values()):
        return None
    return search({}, allowed)


def certain_bruteforce(query: Query, instance: Instance, bound: int = DEFAULT_BOUND) -> bool:
    """True iff the query holds on every repair (exhaustive search)."""
    return falsifying_repair(query, instance, bound) is None


@dataclass(frozen=True)
class FrugalFamily:
    schema: tuple
    members: frozenset           # the minimal answer sets, each a frozenset of tuples
    compression: Compression | None

    @property
    def representable(self) -> bool:
        return self.compression is not None

    @property
    def certain(self) -> bool:
        return frozenset() not in self.members

    def ordered(self) -> list:
        return sorted((sorted(m, key=row_key) for m in self.members), key=lambda m: [row_key(t) for t in m])


def _minimal(sets: set) -> frozenset:
    ordered = sorted(sets, key=len)
    keep: list = []
    for s in ordered:
        if not any(k <= s for k in keep):
            keep.append(s)
    return frozenset(keep)


def frugal_family(query: Query, instance: Instance, bound: int = DEFAULT_BOUND) -> FrugalFamily:
    """The subset-minimal answer sets over all repairs, plus a compression when one exists."""
    w = witnesses(query, instance)
    schema = w.answers.schema
    rows = list(w.answers)  # same order as w.needs
    groups = list(w.domains)
    count = prod(len(w.domains[g]) for g in groups)
    if count > bound:
        raise BoundExceeded(f"{count} relevant repairs exceed the bound {bound}")
    found = set()
    for choice in product(*(w.domains[g] for g in groups)):
        pick = dict(zip(groups, choice))
        found.add(frozenset(rows[i] for i, need in enumerate(w.needs)
                            if all(pick[g] == r for g, r in need.items())))
    members = _minimal(found) if found else frozenset({frozenset()})
    return FrugalFamily(schema, members, compress(schema, members))


def compress(schema: tuple, members: frozenset) -> Compression | None:
    """The unique coordinate-disjoint or-set family whose expansion is ``members``, if any.

    Two tuples belong to the same or-set exactly when no member contains both.
    """
    if frozenset() in members:
        return Compression(schema) if members == frozenset({frozenset()}) else None
    tuples = sorted({t for m in members for t in m}, key=row_key)
    parent = {t: t for t in tuples}

    def find(t):
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    together = {pair for m in members for pair in combinations(sorted(m, key=row_key), 2)}
    for a, b in combinations(tuples, 2):
        if (a, b) not in together:
            parent[find(a)] = find(b)
    parts: dict = {}
    for t in tuples:
        parts.setdefault(find(t), set()).add(t)
    candidate = Compression(schema, frozenset(frozenset(p) for p in parts.values()))
    if candidate.violations() or candidate.expand() != members:
        return None
    return candidate


# --- the dispatcher -------------------------------------------------------------

@dataclass
class SolveResult:
    certain: bool | None
    method: str
    classification: str
    witness: tuple | None = None
    components: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def status(self) -> str:
        if self.certain is None:
            return "undecided"
        return "certain" if self.certain else "not certain"

    def to_json(self) -> dict:
        return {
            "certain": self.certain,
            "status": self.status,
            "method": self.method,
            "classification": self.classification,
            "witness": list(self.witness) if self.witness else None,
            "components": self.components,
            "timing": {"seconds": round(self.seconds, 6)},
        }


def solve(query: Query, instance: Instance, bound: int = DEFAULT_BOUND, trace: list | None = None) -> SolveResult:
    """Normalize, classify each component, and decide certainty.

    Splittable components go to the recursive solver; unsplittable ones fall back
    to the exponential search, which may give up once ``bound`` is exceeded.
    """
    from .graph import classify
    from .model import build_query_graph
    from .normalize import normalize
    from .recursive import recursive_split

    start = time.perf_counter()
    form = normalize(query, instance)
    verdicts = []
    reports = []
    methods = set()
    witness = None
    hard = False
    for i, comp in enumerate(form.components):
        rep: dict = {"index": i, "query": str(comp.query)}
        if comp.decided is not None:
            rep.update(method="evaluation", certain=comp.decided, classification="PTIME")
            verdicts.append(comp.decided)
            reports.append(rep)
            continue
        graph = build_query_graph(comp.query)
        c = classify(graph)
        rep["classification"] = c.verdict
        if c.splittable:
            level_trace = [] if trace is not None else None
            ok = recursive_split(comp.instance, graph, level_trace)
            rep.update(method="recursive_split", certain=ok)
            if trace is not None:
                trace.append({"component": i, "levels": level_trace})
            methods.add("recursive_split")
        else:
            hard = True
            witness = witness or c.witness
            methods.add("bruteforce")
            rep["method"] = "bruteforce"
            rep["note"] = "exponential fallback"
            try:
                ok = certain_bruteforce(comp.query, comp.instance, bound)
            except BoundExceeded as exc:
                ok = None
                rep["note"] = f"exponential fallback: {exc}"
            rep["certain"] = ok
        verdicts.append(ok)
        reports.append(rep)
    if any(v is False for v in verdicts):
        certain = False
    elif any(v is None for v in verdicts):
        certain = None
    else:
        certain = True
    method = "bruteforce" if "bruteforce" in methods else ("recursive_split" if methods else "evaluation")
    return SolveResult(certain, method, "coNP-complete" if hard else "PTIME", witness, reports,
                       time.perf_counter() - start)
