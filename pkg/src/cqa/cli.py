"""Command-line entry point: classify, solve, gen-hard, normalize, oracle.

Every command writes one JSON document to stdout (or to --out).  ``solve``
exits 0 when the query is certain, 1 when it is not, and 2 when the
exponential fallback gave up; any error exits 3.
"""
from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from .formats import (FormatError, dumps, family_to_json, instance_from_json, instance_to_json, loads,
                      query_from_json, query_to_json)
from .graph import classification_report
from .hardness import (MonotoneFormula, format_clause, generate_hard_instance, labeling_for, parse_monotone_cnf,
                       random_monotone_formula)
from .model import build_query_graph
from .normalize import UnaryOnlyQuery, normalize, normalize_query
from .oracle import DEFAULT_BOUND, BoundExceeded, frugal_family, solve

EXIT_CERTAIN, EXIT_NOT_CERTAIN, EXIT_UNDECIDED, EXIT_ERROR = 0, 1, 2, 3


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_ERROR)


def _read(path: str, what: str) -> str:
    try:
        return sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {what} {path}: {exc.strerror}") from None


def _query(path: str):
    return query_from_json(loads(_read(path, "query"), f"query {path}"))


def _instance(path: str):
    return instance_from_json(loads(_read(path, "instance"), f"instance {path}"))


def _emit(args, doc) -> None:
    text = dumps(doc)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --- commands ---------------------------------------------------------------------------

def cmd_classify(args) -> int:
    query = _query(args.query)
    try:
        parts = normalize_query(query)
    except UnaryOnlyQuery:
        parts = []
    components = []
    for part in parts:
        rep = classification_report(build_query_graph(part))
        rep["query"] = str(part)
        components.append(rep)
    hard = [c for c in components if not c["splittable"]]
    if hard:
        w = hard[0]["witness"]
        summary = f"coNP-complete, witness ({w[0]},{w[1]})"
    else:
        summary = "PTIME"
    doc = {"summary": summary, "verdict": "coNP-complete" if hard else "PTIME"}
    if len(components) == 1:
        doc.update(components[0])
    else:
        doc["components"] = components
    _emit(args, doc)
    return 0


def cmd_solve(args) -> int:
    query, instance = _query(args.query), _instance(args.instance)
    trace: list | None = [] if args.trace else None
    result = solve(query, instance, args.bound, trace)
    doc = result.to_json()
    if args.stable:
        del doc["timing"]
    if trace is not None:
        doc["trace"] = trace
    _emit(args, doc)
    if result.certain is None:
        return EXIT_UNDECIDED
    return EXIT_CERTAIN if result.certain else EXIT_NOT_CERTAIN


def _formula(args) -> MonotoneFormula:
    if args.cnf:
        try:
            return parse_monotone_cnf(_read(args.cnf, "formula"))
        except ValueError as exc:
            raise CliError(f"formula {args.cnf}: {exc}") from None
    return random_monotone_formula(random.Random(args.seed))


def cmd_gen_hard(args) -> int:
    query = _query(args.query)
    try:
        graph = build_query_graph(query)
    except ValueError as exc:
        raise CliError(f"gen-hard needs a query of binary atoms with single-attribute keys: {exc}") from None
    try:
        labeling = labeling_for(graph)
    except ValueError as exc:
        raise CliError(f"rejected: {exc}") from None
    formula = _formula(args)
    instance = generate_hard_instance(labeling, formula)
    doc = {
        "instance": instance_to_json(instance),
        "labeling": labeling.to_json(),
        "provenance": {
            "witness": [labeling.r, labeling.s],
            "swapped": labeling.swapped,
            "formula": [format_clause(c) for c in formula.clauses],
            "dimacs": formula.to_dimacs(),
            "seed": None if args.cnf else args.seed,
        },
    }
    if len(formula.variables) <= 20:
        doc["provenance"]["satisfiable"] = formula.satisfiable()
    _emit(args, doc)
    return 0


def cmd_normalize(args) -> int:
    query, instance = _query(args.query), _instance(args.instance)
    form = normalize(query, instance)
    doc = {
        "components": [{"query": query_to_json(c.query), "instance": instance_to_json(c.instance),
                        **({"decided": c.decided} if c.decided is not None else {})}
                       for c in form.components],
        "trace": [s.to_json() for s in form.trace],
    }
    _emit(args, doc)
    return 0


def cmd_oracle(args) -> int:
    query, instance = _query(args.query), _instance(args.instance)
    family = frugal_family(query, instance, args.bound)
    doc = family_to_json(family)
    if not family.representable:
        doc["note"] = "not representable"
    _emit(args, doc)
    return 0


# --- wiring -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bound", type=int, default=DEFAULT_BOUND,
                        help="give up on exhaustive search beyond this many steps (default %(default)s)")
    common.add_argument("--seed", type=int, default=0, help="seed for anything randomized")
    common.add_argument("--trace", action="store_true", help="include the solver trace")
    common.add_argument("--out", help="write the JSON result here instead of stdout")

    p = _Parser(prog="cqa", description="Certainty of Boolean queries over inconsistent databases.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    c = sub.add_parser("classify", parents=[common], help="PTIME or coNP-complete, with the evidence")
    c.add_argument("query")
    c.set_defaults(run=cmd_classify)
    s = sub.add_parser("solve", parents=[common], help="decide certainty (exit 0 certain, 1 not, 2 undecided)")
    s.add_argument("query")
    s.add_argument("instance")
    s.add_argument("--stable", action="store_true", help="omit timing so output is byte-stable")
    s.set_defaults(run=cmd_solve)
    g = sub.add_parser("gen-hard", parents=[common], help="compile a monotone CNF into a hard instance")
    g.add_argument("query")
    g.add_argument("cnf", nargs="?", help="DIMACS file; a random formula from --seed if omitted")
    g.set_defaults(run=cmd_gen_hard)
    n = sub.add_parser("normalize", parents=[common], help="rewrite into graph-representable components")
    n.add_argument("query")
    n.add_argument("instance")
    n.set_defaults(run=cmd_normalize)
    o = sub.add_parser("oracle", parents=[common], help="frugal answer sets and their compression")
    o.add_argument("query")
    o.add_argument("instance")
    o.set_defaults(run=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (CliError, FormatError, BoundExceeded, ValueError, KeyError) as exc:
        print(f"cqa {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
