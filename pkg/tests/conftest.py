import itertools
import random
from pathlib import Path

import pytest

from cayley_entropy.treeshift import MarkovTreeShift, TwoBlock, all_two_blocks, load_treeshift

DATA = Path(__file__).parent / "data"


def golden_mean():
    blocks = [TwoBlock("1", ("0", "0"))]
    blocks += [TwoBlock("0", c) for c in itertools.product("01", repeat=2)]
    return MarkovTreeShift(("0", "1"), 2, frozenset(blocks))


def sink_pair():
    # + -> (-,-), - -> (-,-): no symbol ever has two choices
    return MarkovTreeShift(("+", "-"), 2, frozenset({TwoBlock("+", ("-", "-")), TwoBlock("-", ("-", "-"))}))


def random_treeshift(rng: random.Random, k: int, d: int, density: float = 0.5) -> MarkovTreeShift:
    alphabet = tuple("abc"[:k])
    blocks = [b for b in all_two_blocks(alphabet, d) if rng.random() < density]
    return MarkovTreeShift(alphabet, d, frozenset(blocks))


def all_k2_treeshifts(d: int):
    """Every allowed-set over {a, b} with d children (2 ** (2 * 2**d) of them)."""
    alphabet = ("a", "b")
    blocks = list(all_two_blocks(alphabet, d))
    for mask in range(1 << len(blocks)):
        yield MarkovTreeShift(alphabet, d, frozenset(b for i, b in enumerate(blocks) if mask >> i & 1))


@pytest.fixture
def gm():
    return golden_mean()


@pytest.fixture
def tribonacci():
    return load_treeshift(DATA / "tribonacci.json")


@pytest.fixture
def data_dir():
    return DATA


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
