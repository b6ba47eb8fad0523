import os
import subprocess
import sys

import numpy as np
import pytest

from treeid import _kernels
from treeid.estimation import zoh_matrices
from treeid.system import build_system
from treeid.tree import random_tree

needs_numba = pytest.mark.skipif(not _kernels._HAVE_NUMBA, reason="numba not installed")


def _case(seed, n=12):
    rng = np.random.default_rng(seed)
    tree = random_tree(n, rng, weight_range=(0.1, 10.0))
    eu, ev = tree.edge_arrays
    return tree, eu, ev


@needs_numba
@pytest.mark.parametrize("seed", range(5))
def test_power_columns_backends_agree(seed):
    tree, eu, ev = _case(seed)
    args = (eu, ev, tree.weights, tree.n, tree.index(tree.root), 2 * tree.n)
    a = _kernels.power_columns_numpy(*args)
    b = _kernels.power_columns_numba(*args)
    scale = np.maximum(np.abs(a).max(axis=1, keepdims=True), 1e-300)
    assert np.max(np.abs(a - b) / scale) <= 1e-13


@needs_numba
@pytest.mark.parametrize("seed", range(3))
def test_zoh_backends_agree(seed):
    tree, _, _ = _case(seed, 8)
    sys_ = build_system(tree, tree.nodes[:3])
    Ad, Bd = zoh_matrices(sys_.L, sys_.B, 0.05)
    u = np.random.default_rng(seed).normal(size=200)
    x0 = np.zeros(tree.n)
    a = _kernels.zoh_outputs_numpy(Ad, Bd, sys_.sensor_index, u, x0)
    b = _kernels.zoh_outputs_numba(Ad, Bd, sys_.sensor_index, u, x0)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


def test_power_columns_single_node():
    out = _kernels.power_columns(np.zeros(0), np.zeros(0), np.zeros(0), 1, 0, 3)
    np.testing.assert_array_equal(out, [[1.0], [0.0], [0.0]])


def test_warmup_runs():
    _kernels.warmup()
    assert _kernels.BACKEND in ("numba", "numpy")


def test_env_flag_selects_numpy():
    env = dict(os.environ, TREEID_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from treeid import _kernels; print(_kernels.BACKEND)"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "numpy"
