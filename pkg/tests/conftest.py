"""Shared fixtures: the reference dataset, schema, and workload.

The dataset D1 is six triples about two students and their shared
professor; S1 is the four-statement schema over it; the workload holds
the advisor/Professor join q1 and the constant-advisor lookup q2.
Schema and workload IRIs are the short local names used by the fixture
files, wired through a Vocabulary override.
"""

import json
from pathlib import Path

import pytest

from rdftuner.queries import load_workload
from rdftuner.reasoner import (
    Vocabulary,
    compute_closure,
    parse_schema,
    reformulate_workload,
)
from rdftuner.store import load_dataset, parse_ntriples
from rdftuner.views import initial_state

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# Acceptance tests append one "criterion N (...): PASS/FAIL" line each;
# the terminal-summary hook replays them after the run so they stay
# visible even when pytest captures stdout.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


SHORT_VOCAB = Vocabulary(
    type="type",
    subclass="subClassOf",
    subproperty="subPropertyOf",
    domain="domain",
    range="range",
)


@pytest.fixture
def d1_text():
    return (FIXTURES / "D1.nt").read_text()


@pytest.fixture
def s1_text():
    return (FIXTURES / "S1.nt").read_text()


@pytest.fixture
def workload_text():
    return (FIXTURES / "workload.json").read_text()


@pytest.fixture
def d1(d1_text):
    """(dictionary, table, stats) for the reference dataset."""
    return load_dataset(parse_ntriples(d1_text))


@pytest.fixture
def vocab():
    return SHORT_VOCAB


@pytest.fixture
def s1(d1, s1_text, vocab):
    """(schema, closure) for the reference schema, sharing d1's dictionary."""
    dictionary, _, _ = d1
    schema = parse_schema(parse_ntriples(s1_text), dictionary, vocab)
    return schema, compute_closure(schema)


@pytest.fixture
def w1(d1, workload_text):
    """The reference workload parsed against d1's dictionary."""
    dictionary, _, _ = d1
    return load_workload(workload_text, dictionary)


@pytest.fixture
def reformulated(w1, s1):
    schema, closure = s1
    return reformulate_workload(w1, closure, schema, 1024)


@pytest.fixture
def s0(reformulated):
    """Initial state of the reformulated reference workload."""
    return initial_state(reformulated)


@pytest.fixture
def fixture_texts(d1_text, s1_text, workload_text):
    return {"dataset": d1_text, "schema": s1_text, "workload": workload_text}
