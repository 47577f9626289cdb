import random

import pytest

from cqa import catalog
from cqa.model import build_query_graph

# filled by test_acceptance.py; one (criterion, passed, detail) entry per criterion
ACCEPTANCE: dict = {}


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def h_graph():
    return build_query_graph(catalog.H)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.rstrip("ab")), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
