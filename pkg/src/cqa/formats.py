"""JSON forms of queries, instances, compressions and frugal families.

Query:     {"atoms": [{"name": "R", "key": ["x"], "rest": ["y", {"const": "a"}], "consistent": false}]}
Instance:  {"R": [["a", "b"], ...], ...}
Constant:  a string, or {"tag": kind, "items": [constant, ...]} for structured values
"""
from __future__ import annotations

import json

from .model import Atom, Compression, ConstTerm, Instance, Query, const_from_json, const_to_json, row_key


class FormatError(ValueError):
    pass


def loads(text: str, what: str = "input"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{what}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _term_from_json(obj, where: str):
    if isinstance(obj, str):
        return obj
    if isinstance(obj, dict) and set(obj) == {"const"}:
        return ConstTerm(const_from_json(obj["const"]))
    raise FormatError(f"{where}: a term is a variable name or {{\"const\": value}}, got {obj!r}")


def _term_to_json(t):
    return t if isinstance(t, str) else {"const": const_to_json(t.value)}


def query_from_json(obj) -> Query:
    if not isinstance(obj, dict) or not isinstance(obj.get("atoms"), list):
        raise FormatError('query: expected an object with an "atoms" list')
    atoms = []
    for i, a in enumerate(obj["atoms"]):
        where = f"query atom {i}"
        if not isinstance(a, dict) or "name" not in a or not isinstance(a.get("key"), list):
            raise FormatError(f'{where}: needs "name" and a "key" list')
        key = [_term_from_json(t, where) for t in a["key"]]
        rest = [_term_from_json(t, where) for t in a.get("rest", [])]
        if not key:
            raise FormatError(f"{where}: empty key")
        if len(key) > 1 and rest:
            raise FormatError(f"{where}: a key of several attributes must cover the whole atom")
        all_key = len(key) > 1
        try:
            atoms.append(Atom(str(a["name"]), tuple(key + rest), all_key=all_key,
                              consistent=bool(a.get("consistent", False))))
        except ValueError as exc:
            raise FormatError(f"{where}: {exc}") from None
    try:
        return Query(tuple(atoms))
    except ValueError as exc:
        raise FormatError(f"query: {exc}") from None


def query_to_json(query: Query) -> dict:
    atoms = []
    for a in query.atoms:
        k = a.key_len
        atoms.append({"name": a.name, "key": [_term_to_json(t) for t in a.terms[:k]],
                      "rest": [_term_to_json(t) for t in a.terms[k:]], "consistent": a.consistent})
    return {"atoms": atoms}


def instance_from_json(obj) -> Instance:
    if not isinstance(obj, dict):
        raise FormatError("instance: expected an object mapping relation names to lists of rows")
    rels = {}
    for name, rows in obj.items():
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise FormatError(f"instance relation {name}: expected a list of rows")
        try:
            rels[name] = {tuple(const_from_json(c) for c in r) for r in rows}
        except ValueError as exc:
            raise FormatError(f"instance relation {name}: {exc}") from None
    return Instance(rels)


def instance_to_json(instance: Instance) -> dict:
    return {name: [[const_to_json(c) for c in row] for row in sorted(rows, key=row_key)]
            for name, rows in sorted(instance.items())}


def compression_to_json(c: Compression | None):
    return None if c is None else c.to_json()


def family_to_json(family) -> dict:
    return {
        "schema": list(family.schema),
        "members": [[[const_to_json(c) for c in t] for t in m] for m in family.ordered()],
        "representable": family.representable,
        "compression": compression_to_json(family.compression),
        "certain": family.certain,
    }
