"""Named example queries and instances used by the docs, the CLI and the tests."""
from __future__ import annotations

from .model import Atom, Instance, Query, binary


def q(*atoms: Atom) -> Query:
    return Query(atoms)


def rows(text: str) -> list:
    """'a1 b1, a1 b2' -> [('a1', 'b1'), ('a1', 'b2')]"""
    return [tuple(part.split()) for part in text.split(",") if part.strip()]


Q1 = q(binary("R", "x", "y"))
Q2 = q(binary("R", "x", "y"), binary("S", "z", "y"))
Q3 = q(binary("R", "x", "y"), binary("S", "z", "y"), binary("T", "z", "y"))

K1 = q(binary("R", "x", "y"), binary("S", "z", "w"), binary("T", "y", "w", True))
K2 = q(binary("R", "x", "y"), binary("S", "z", "w"), binary("T", "y", "w", True), binary("U", "x", "z", True))

H = q(
    binary("R1", "x", "y"),
    binary("R2", "y", "z", True),
    binary("R3", "z", "x"),
    binary("V1", "u", "y", True),
    binary("V2", "x", "v", True),
    binary("V3", "z", "v", True),
    binary("S", "u", "v"),
    binary("T", "v", "w"),
    binary("U", "u", "w", True),
)

C3 = q(binary("R", "x", "y"), binary("S", "y", "z"), binary("T", "z", "x"))

H2 = q(binary("R", "x", "y"), binary("S", "y", "z"), binary("T", "z", "x"),
       binary("U", "y", "t"), binary("V", "t", "z"))

# two keys from the same source: not f-closed
NOT_F_CLOSED = q(binary("R", "x", "y"), binary("S", "x", "y"), binary("T", "z", "y"))

# R(x,y), S(y,z) with x reaching z and t avoiding R and S; z does not reach t
LABEL_EXAMPLE = q(binary("R", "x", "y"), binary("S", "y", "z"),
                  binary("A", "x", "z", True), binary("B", "x", "t", True), binary("C", "y", "t", True))

PATH2 = q(binary("R", "x", "y"), binary("S", "y", "z"))

# S is keyed on its y attribute: S(y, x)
FRUGAL_QUERY = q(binary("R", "x", "y"), binary("S", "y", "x"))
FRUGAL_INSTANCE = Instance({
    "R": rows("a1 b1, a1 b2, a2 b3, a3 b4, a3 b5"),
    "S": rows("b1 a1, b3 a2, b4 a3, b5 a3"),
})

# the same facts read against R(x,y), S(x,y)
FRUGAL_LITERAL_QUERY = q(binary("R", "x", "y"), binary("S", "x", "y"))
FRUGAL_LITERAL_INSTANCE = Instance({
    "R": rows("a1 b1, a1 b2, a2 b3, a3 b4, a3 b5"),
    "S": rows("a1 b1, a2 b3, b4 a3, b5 a3"),
})

CYCLE_INSTANCE = Instance({
    "R": rows("a1 b1, a1 b2, a2 b2, a3 b3, a3 b4, a4 b4"),
    "S": rows("b1 c1, b2 c1, b2 c2, b3 c3, b4 c4, b4 c3"),
    "T": rows("c1 a1, c2 a2, c3 a3, c4 a3, c3 a4"),
})

H2_INSTANCE = Instance({
    "R": rows("a1 b1, a2 b2, a2 b3"),
    "S": rows("b1 c1, b2 c2, b3 c2"),
    "T": rows("c1 a1, c2 a2"),
    "U": rows("b1 d, b2 d, b3 d"),
    "V": rows("d c1, d c2"),
})

# a two-answer instance of PATH2 whose frugal family is a single two-tuple or-set
PATH2_INSTANCE = Instance({"R": [("a", "b")], "S": [("b", "c1"), ("b", "c2")]})

QUERIES = {
    "Q1": Q1, "Q2": Q2, "Q3": Q3, "K1": K1, "K2": K2, "H": H, "C3": C3, "H2": H2,
    "NOT_F_CLOSED": NOT_F_CLOSED, "LABEL_EXAMPLE": LABEL_EXAMPLE, "PATH2": PATH2,
    "FRUGAL_QUERY": FRUGAL_QUERY,
}

EXAMPLES = {
    "frugal": (FRUGAL_QUERY, FRUGAL_INSTANCE),
    "cycle": (C3, CYCLE_INSTANCE),
    "h2": (H2, H2_INSTANCE),
    "path2": (PATH2, PATH2_INSTANCE),
}
