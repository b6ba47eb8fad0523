"""Compare the numba and numpy kernels on random trees.

    python benchmarks/bench_kernels.py [--sizes 10 100 1000] [--repeat 20]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from treeid import _kernels
from treeid.estimation import zoh_matrices
from treeid.system import build_system
from treeid.tree import random_tree


def bench(fn, args, repeat):
    fn(*args)
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[10, 100, 1000])
    p.add_argument("--powers", type=int, default=40, help="Markov columns per tree (L^k grows fast)")
    p.add_argument("--steps", type=int, default=2000, help="samples for the ZOH loop")
    p.add_argument("--repeat", type=int, default=20)
    p.add_argument("--seed", type=int, default=42)
    args = p.parse_args(argv)
    if not _kernels._HAVE_NUMBA:
        raise SystemExit("numba is not installed")
    _kernels.warmup()
    rng = np.random.default_rng(args.seed)

    print(f"{'kernel':<14}{'n':>6}{'numpy [ms]':>14}{'numba [ms]':>14}{'speedup':>10}{'max diff':>12}")
    for n in args.sizes:
        tree = random_tree(n, rng, weight_range=(0.5, 2.0), kind="recursive")
        eu, ev = tree.edge_arrays
        pargs = (eu, ev, np.asarray(tree.weights), n, 0, args.powers)
        t_np = bench(_kernels.power_columns_numpy, pargs, args.repeat)
        t_nb = bench(_kernels.power_columns_numba, pargs, args.repeat)
        a, b = _kernels.power_columns_numpy(*pargs), _kernels.power_columns_numba(*pargs)
        scale = np.maximum(np.abs(a).max(axis=0, keepdims=True), 1e-300)
        diff = float(np.max(np.abs(a - b) / scale))
        print(f"{'power_columns':<14}{n:>6}{1e3 * t_np:>14.3f}{1e3 * t_nb:>14.3f}{t_np / t_nb:>10.1f}{diff:>12.1e}")

        if n > 300:
            continue
        sys_ = build_system(tree, tree.nodes[: max(1, n // 4)])
        Ad, Bd = zoh_matrices(sys_.L, sys_.B, 0.01)
        u = rng.normal(size=args.steps)
        zargs = (Ad, Bd, sys_.sensor_index, u, np.zeros(n))
        t_np = bench(_kernels.zoh_outputs_numpy, zargs, args.repeat)
        t_nb = bench(_kernels.zoh_outputs_numba, zargs, args.repeat)
        diff = float(np.max(np.abs(_kernels.zoh_outputs_numpy(*zargs) - _kernels.zoh_outputs_numba(*zargs))))
        print(f"{'zoh_outputs':<14}{n:>6}{1e3 * t_np:>14.3f}{1e3 * t_nb:>14.3f}{t_np / t_nb:>10.1f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
