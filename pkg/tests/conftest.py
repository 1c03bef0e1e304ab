import random
from pathlib import Path

import pytest

from testtrim.config import RunConfig
from testtrim.corpus import build_corpus
from testtrim.netlist import parse_bench

DATA_DIR = Path(__file__).parent / "data"

AND_BENCH = """\
INPUT(a)
INPUT(b)
OUTPUT(z)
z = AND(a, b)
"""


@pytest.fixture(scope="session")
def and_circuit():
    return parse_bench(AND_BENCH, name="and2")


@pytest.fixture(scope="session")
def sample6_text():
    return (DATA_DIR / "sample6.bench").read_text()


@pytest.fixture(scope="session")
def sample6(sample6_text):
    return parse_bench(sample6_text, name="sample6")


@pytest.fixture(scope="session")
def small_corpus():
    """Twelve small circuits, quick to build, shared across test modules."""
    cfg = RunConfig(corpus_circuits=12, corpus_patterns=48, corpus_seed=5,
                    corpus_min_inputs=4, corpus_max_inputs=6,
                    corpus_min_gates=8, corpus_max_gates=16)
    return build_corpus(cfg)


def random_small_circuit(seed: int, max_inputs: int = 6, max_gates: int = 14):
    """Deterministic small random circuit for property-style tests."""
    from testtrim.generator import random_circuit
    rng = random.Random(f"prop:{seed}")
    return random_circuit(f"r{seed}", rng, min_inputs=3, max_inputs=max_inputs,
                          min_gates=4, max_gates=max_gates)
