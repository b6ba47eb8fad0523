import sys
from pathlib import Path

import numpy as np
import pytest

from treeid.demos import network3, t1_tree
from treeid.tree import WeightedTree

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def t1() -> WeightedTree:
    return t1_tree()


@pytest.fixture
def star3() -> WeightedTree:
    return network3(1.0, 2.0, 3.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def data_dir() -> Path:
    return DATA


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(results[k])
