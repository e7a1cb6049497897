import pytest

from supercheck.driver import build_graph
from supercheck.selfint import (build_interpreted, int_root_seq,
                                load_corpus_program, load_interpreter)

MUTANTS = ("wm_double_dirty", "wm_keeps_valid", "rm_keeps_dirty")


@pytest.fixture(scope="session")
def synapse():
    return load_corpus_program("synapse.l")


@pytest.fixture(scope="session")
def interpreter():
    return load_interpreter()


@pytest.fixture(scope="session")
def mutants():
    return {name: load_corpus_program(f"mutations/{name}.l")
            for name in MUTANTS}


@pytest.fixture(scope="session")
def indirect_graph(synapse):
    """First-round graph of the interpreter specialized to the model;
    built once, reused by the trace-shape and acceptance tests."""
    combined = build_interpreted(synapse, "synapse")
    return build_graph(combined, int_root_seq("Main", "synapse"))
