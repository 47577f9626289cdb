"""Hard instances for unsplittable queries from monotone 3SAT.

A labeling assigns every query variable one of six labels ordered as a
lattice.  Each label names a set of formula objects (clauses, variables,
literals, truth values, clause-literal pairs, the empty tuple), and each
covering pair of labels comes with a projection between those sets.  Edges
other than the coupled pair become graphs of projections, so they are always
key-consistent; the coupled pair becomes the two choice relations.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from itertools import product

from .graph import classify, source_le
from .model import Composite, Instance, QueryGraph


class Label(enum.Enum):
    BOTTOM = "⊥"
    BOOL = "𝔹"
    VAR = "X"
    CLAUSE = "Φ"
    LITERAL = "X*"
    TOP = "⊤"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "Label":
        for lab in cls:
            if text in (lab.value, lab.name):
                return lab
        raise ValueError(f"unknown label {text!r}")


# label -> labels strictly below it
_BELOW = {
    Label.BOTTOM: set(),
    Label.BOOL: {Label.BOTTOM},
    Label.VAR: {Label.BOTTOM},
    Label.CLAUSE: {Label.BOOL, Label.BOTTOM},
    Label.LITERAL: {Label.VAR, Label.BOOL, Label.BOTTOM},
    Label.TOP: {Label.CLAUSE, Label.LITERAL, Label.VAR, Label.BOOL, Label.BOTTOM},
}

COVERS = {
    (Label.CLAUSE, Label.BOOL), (Label.LITERAL, Label.VAR), (Label.LITERAL, Label.BOOL),
    (Label.TOP, Label.CLAUSE), (Label.TOP, Label.LITERAL), (Label.BOOL, Label.BOTTOM),
    (Label.VAR, Label.BOTTOM),
}


def leq(a: Label, b: Label) -> bool:
    return a == b or a in _BELOW[b]


def meet(a: Label, b: Label) -> Label:
    lower = [c for c in Label if leq(c, a) and leq(c, b)]
    return next(c for c in lower if all(leq(d, c) for d in lower))


def join(a: Label, b: Label) -> Label:
    upper = [c for c in Label if leq(a, c) and leq(b, c)]
    return next(c for c in upper if all(leq(c, d) for d in upper))


def meet_all(labels) -> Label:
    out = Label.TOP
    for lab in labels:
        out = meet(out, lab)
    return out


# --- formulas ---------------------------------------------------------------------

@dataclass(frozen=True)
class MonotoneFormula:
    """Clauses are tuples of (variable, positive) literals, all of one sign."""
    variables: tuple
    clauses: tuple

    def __post_init__(self):
        for i, c in enumerate(self.clauses, start=1):
            if not 1 <= len(c) <= 3:
                raise ValueError(f"clause {i} has {len(c)} literals; expected 1 to 3")
            if len({pos for _, pos in c}) != 1:
                raise ValueError(f"clause {i} {format_clause(c)} mixes polarities")
            for v, _ in c:
                if v not in self.variables:
                    raise ValueError(f"clause {i} uses undeclared variable {v}")
        used = {v for c in self.clauses for v, _ in c}
        missing = [v for v in self.variables if v not in used]
        if missing:
            raise ValueError(f"variables {missing} occur in no clause")

    @classmethod
    def of(cls, clauses) -> "MonotoneFormula":
        """Build from clauses like ["x+ y+ z+", "z- w-"], keeping first-seen variable order."""
        parsed = []
        names: list = []
        for text in clauses:
            lits = []
            for tok in text.split():
                m = re.fullmatch(r"(.+)([+-])", tok)
                if not m:
                    raise ValueError(f"bad literal {tok!r}")
                lits.append((m.group(1), m.group(2) == "+"))
                if m.group(1) not in names:
                    names.append(m.group(1))
            parsed.append(tuple(lits))
        return cls(tuple(names), tuple(parsed))

    def satisfied_by(self, assignment: dict) -> bool:
        return all(any(assignment[v] == pos for v, pos in c) for c in self.clauses)

    def satisfiable(self) -> bool:
        for bits in product((False, True), repeat=len(self.variables)):
            if self.satisfied_by(dict(zip(self.variables, bits))):
                return True
        return False

    def to_dimacs(self) -> str:
        index = {v: i for i, v in enumerate(self.variables, start=1)}
        lines = [f"c var {index[v]} {v}" for v in self.variables]
        lines.append(f"p cnf {len(self.variables)} {len(self.clauses)}")
        for c in self.clauses:
            lines.append(" ".join(str(index[v] if pos else -index[v]) for v, pos in c) + " 0")
        return "\n".join(lines) + "\n"


def format_clause(clause) -> str:
    return "(" + " ∨ ".join(f"{v}{'+' if pos else '-'}" for v, pos in clause) + ")"


def parse_monotone_cnf(text: str) -> MonotoneFormula:
    """DIMACS CNF restricted to monotone clauses of width 1..3.

    ``c var <index> <name>`` comments name variables; others default to x<index>.
    """
    names: dict = {}
    header = None
    numbers: list = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) == 4 and parts[1] == "var":
                names[int(parts[2])] = parts[3]
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: malformed problem line {line!r}")
            header = (int(parts[2]), int(parts[3]))
            continue
        if header is None:
            raise ValueError(f"line {lineno}: clause before the 'p cnf' line")
        try:
            numbers.extend((int(tok), lineno) for tok in line.split())
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer token in {line!r}") from None
    if header is None:
        raise ValueError("missing 'p cnf' line")
    clauses = []
    current: list = []
    for n, lineno in numbers:
        if n == 0:
            clauses.append(current)
            current = []
            continue
        if abs(n) > header[0]:
            raise ValueError(f"line {lineno}: variable {abs(n)} exceeds the declared {header[0]}")
        current.append(n)
    if current:
        raise ValueError("last clause is not terminated by 0")
    if len(clauses) != header[1]:
        raise ValueError(f"expected {header[1]} clauses, found {len(clauses)}")
    order: list = []
    out = []
    for i, c in enumerate(clauses, start=1):
        if not c or len(c) > 3:
            raise ValueError(f"clause {i} {c} has {len(c)} literals; expected 1 to 3")
        if len({n > 0 for n in c}) != 1:
            raise ValueError(f"clause {i} {c} is not monotone")
        lits = []
        for n in c:
            name = names.get(abs(n), f"x{abs(n)}")
            if name not in order:
                order.append(name)
            lits.append((name, n > 0))
        out.append(tuple(lits))
    declared = [names.get(i, f"x{i}") for i in range(1, header[0] + 1)]
    variables = tuple(v for v in declared if v in order)
    return MonotoneFormula(variables, tuple(out))


# --- carriers and maps ------------------------------------------------------------

UNIT = Composite("unit", ())
TRUE = Composite("bool", ("T",))
FALSE = Composite("bool", ("F",))


def clause_const(i: int) -> Composite:
    return Composite("clause", (str(i),))


def var_const(v: str) -> Composite:
    return Composite("var", (v,))


def lit_const(v: str, positive: bool) -> Composite:
    return Composite("lit", (v, "+" if positive else "-"))


def pair_const(i: int, v: str, positive: bool) -> Composite:
    return Composite("pair", (clause_const(i), lit_const(v, positive)))


def carrier(label: Label, formula: MonotoneFormula) -> list:
    """The formula objects a label stands for, in a fixed order."""
    if label is Label.BOTTOM:
        return [UNIT]
    if label is Label.BOOL:
        return [TRUE, FALSE]
    if label is Label.VAR:
        return [var_const(v) for v in formula.variables]
    if label is Label.CLAUSE:
        return [clause_const(i) for i in range(1, len(formula.clauses) + 1)]
    if label is Label.LITERAL:
        return [lit_const(v, pos) for v in formula.variables for pos in (True, False)]
    return [pair_const(i, v, pos) for i, c in enumerate(formula.clauses, start=1) for v, pos in c]


def _cover_map(high: Label, low: Label, element, formula: MonotoneFormula):
    if (high, low) == (Label.CLAUSE, Label.BOOL):
        i = int(element.items[0])
        return TRUE if formula.clauses[i - 1][0][1] else FALSE
    if (high, low) == (Label.LITERAL, Label.VAR):
        return var_const(element.items[0])
    if (high, low) == (Label.LITERAL, Label.BOOL):
        return TRUE if element.items[1] == "+" else FALSE
    if (high, low) == (Label.TOP, Label.CLAUSE):
        return element.items[0]
    if (high, low) == (Label.TOP, Label.LITERAL):
        return element.items[1]
    if low is Label.BOTTOM:
        return UNIT
    raise ValueError(f"{high} does not cover {low}")


def _chain(high: Label, low: Label) -> list:
    """Some descending chain of covering pairs from high to low."""
    if high == low:
        return [high]
    for h, l in sorted(COVERS, key=lambda p: (p[0].name, p[1].name)):
        if h == high and leq(low, l):
            return [high] + _chain(l, low)
    raise ValueError(f"{high} is not above {low}")


def lattice_map(high: Label, low: Label, element, formula: MonotoneFormula, via: Label | None = None):
    """f_{high,low}(element), composed along covering pairs (through ``via`` if given)."""
    if not leq(low, high):
        raise ValueError(f"no map from {high} to {low}: {high} is not above {low}")
    if via is not None:
        if not (leq(via, high) and leq(low, via)):
            raise ValueError(f"{via} is not between {high} and {low}")
        return lattice_map(via, low, lattice_map(high, via, element, formula), formula)
    chain = _chain(high, low)
    for h, l in zip(chain, chain[1:]):
        element = _cover_map(h, l, element, formula)
    return element


# --- labelings ----------------------------------------------------------------------

ROLE_LABELS = (("u_R", Label.CLAUSE), ("v_R", Label.TOP), ("u_S", Label.VAR), ("v_S", Label.LITERAL))


@dataclass
class Labeling:
    graph: QueryGraph
    r: str
    s: str
    labels: dict          # vertex -> Label
    origins: dict         # vertex -> roles (u_R, v_R, u_S, v_S) that reach it
    swapped: bool = False
    empty_meets: tuple = ()  # vertices no distinguished node reaches

    def roles(self) -> dict:
        er, es = self.graph.edge(self.r), self.graph.edge(self.s)
        return {"u_R": er.source, "v_R": er.target, "u_S": es.source, "v_S": es.target}

    def to_json(self) -> dict:
        return {v: str(self.labels[v]) for v in sorted(self.labels)}


def _reach_avoiding(graph: QueryGraph, start: str, banned: set) -> set:
    seen = {start}
    todo = [start]
    while todo:
        v = todo.pop()
        for e in graph.edges:
            if e.source == v and e.name not in banned and e.target not in seen:
                seen.add(e.target)
                todo.append(e.target)
    return seen


def _undirected_path(graph: QueryGraph, start: str, goal: str, allowed) -> bool:
    if not (allowed(start) and allowed(goal)):
        return False
    seen = {start}
    todo = [start]
    while todo:
        v = todo.pop()
        if v == goal:
            return True
        for e in graph.edges:
            for a, b in ((e.source, e.target), (e.target, e.source)):
                if a == v and b not in seen and allowed(b):
                    seen.add(b)
                    todo.append(b)
    return False


def labeling_violations(graph: QueryGraph, r: str, s: str, labels: dict) -> list:
    """Which of the five validity conditions fail (empty list = valid)."""
    er, es = graph.edge(r), graph.edge(s)
    out = []
    if labels[er.source] is not Label.CLAUSE or labels[er.target] not in (Label.TOP, Label.VAR, Label.LITERAL):
        out.append(f"1: R labeled ({labels[er.source]}, {labels[er.target]})")
    if labels[es.source] is not Label.VAR or labels[es.target] not in (Label.BOOL, Label.LITERAL):
        out.append(f"2: S labeled ({labels[es.source]}, {labels[es.target]})")
    # the construction needs this for every other edge, consistent or not
    for e in graph.edges:
        if e.name not in (r, s) and not leq(labels[e.target], labels[e.source]):
            out.append(f"3: edge {e.name} goes up from {labels[e.source]} to {labels[e.target]}")
    if not _undirected_path(graph, er.target, es.source, lambda v: leq(Label.VAR, labels[v])):
        out.append("4: no path from v_R to u_S through labels >= X")
    if not _undirected_path(graph, es.target, er.source, lambda v: leq(Label.BOOL, labels[v])):
        out.append("5: no path from v_S to u_R through labels >= 𝔹")
    return out


def valid_labeling(graph: QueryGraph, r: str, s: str) -> Labeling:
    """Meet of the initial labels of the distinguished nodes that reach each vertex.

    Reachability avoids both R and S.  Roles are swapped when S reaches R's
    source, since the construction needs the opposite.
    """
    swapped = False
    if source_le(graph, s, r):
        if source_le(graph, r, s):
            raise ValueError(f"{r} and {s} are source-equivalent; no valid labeling")
        r, s = s, r
        swapped = True
    er, es = graph.edge(r), graph.edge(s)
    nodes = {"u_R": er.source, "v_R": er.target, "u_S": es.source, "v_S": es.target}
    reach = {role: _reach_avoiding(graph, nodes[role], {r, s}) for role, _ in ROLE_LABELS}
    labels, origins, empty = {}, {}, []
    for v in sorted(graph.vertices):
        roles = tuple(role for role, _ in ROLE_LABELS if v in reach[role])
        origins[v] = roles
        if not roles:
            empty.append(v)
        labels[v] = meet_all(lab for role, lab in ROLE_LABELS if role in roles)
    bad = labeling_violations(graph, r, s, labels)
    if bad:
        raise AssertionError(f"labeling for ({r}, {s}) is not valid: {bad}")
    return Labeling(graph, r, s, labels, origins, swapped, tuple(empty))


def labeling_for(graph: QueryGraph) -> Labeling:
    c = classify(graph)
    if c.splittable:
        raise ValueError("query graph is splittable: certainty is in polynomial time, no hard instances")
    return valid_labeling(graph, *c.witness)


# --- instance construction ---------------------------------------------------------------

def _choice_relation(source: Label, target: Label, formula: MonotoneFormula) -> set:
    """R or S: walk back from the source label to ⊤ or X*, then forth to the target."""
    if source is Label.CLAUSE and target in (Label.TOP, Label.LITERAL, Label.VAR):
        top = Label.TOP
    elif source is Label.VAR and target in (Label.LITERAL, Label.BOOL):
        top = Label.LITERAL
    else:
        raise ValueError(f"no construction for a choice edge labeled ({source}, {target})")
    return {(lattice_map(top, source, c, formula), lattice_map(top, target, c, formula))
            for c in carrier(top, formula)}


def generate_hard_instance(labeling: Labeling, formula: MonotoneFormula) -> Instance:
    g, L = labeling.graph, labeling.labels
    rels = {}
    for e in g.edges:
        lu, lv = L[e.source], L[e.target]
        if e.name in (labeling.r, labeling.s):
            rels[e.name] = _choice_relation(lu, lv, formula)
        else:
            rels[e.name] = {(a, lattice_map(lu, lv, a, formula)) for a in carrier(lu, formula)}
    return Instance(rels)


def random_monotone_formula(rng, max_vars: int = 12, max_clauses: int = 8) -> MonotoneFormula:
    """Small random monotone formula; few variables and many clauses make UNSAT common."""
    n = rng.randint(1, max_vars)
    names = [f"x{i}" for i in range(1, n + 1)]
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        width = rng.randint(1, min(3, n))
        pos = rng.random() < 0.5
        clauses.append(tuple((v, pos) for v in rng.sample(names, width)))
    used = [v for v in names if any(v == w for c in clauses for w, _ in c)]
    return MonotoneFormula(tuple(used), tuple(clauses))
