"""Named reproductions of the worked examples, each a list of checks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .estimation import identify_end_to_end
from .oracle import analyze_star, figure1_demo, search_counterexample, swap_weights
from .placement import enumerate_placements, place_sensors, predicted_sensor_count
from .recovery import max_relative_error, recover_weights
from .system import build_system, laplacian_matrix, markov_parameters
from .tree import WeightedTree, non_input_leaves

TABLE_RTOL = 1e-10


@dataclass(frozen=True)
class Check:
    label: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        tail = f" ({self.detail})" if self.detail else ""
        return f"{'PASS' if self.ok else 'FAIL'}: {self.label}{tail}"


def t1_tree(weights=(2.0, 1.0, 3.0, 5.0, 4.0)) -> WeightedTree:
    """Six-node example tree; weights listed for edges 1-2, 2-3, 2-5, 5-4, 5-6."""
    w12, w23, w25, w54, w56 = weights
    return WeightedTree.from_edges(1, [(1, 2, w12), (2, 3, w23), (2, 5, w25), (5, 4, w54), (5, 6, w56)])


def network1(a, b, c, d, e, f) -> WeightedTree:
    """Root 1 with children 2, 3, 4; one grandchild under each (5, 6, 7)."""
    return WeightedTree.from_edges(1, [(1, 2, a), (1, 3, b), (1, 4, c), (2, 5, d), (3, 6, e), (4, 7, f)])


def network2(a, b, c, d) -> WeightedTree:
    return WeightedTree.path([a, b, c, d])


def network3(a, b, c) -> WeightedTree:
    return WeightedTree.star([a, b, c])


# (power k, row node, formula); the column is always the root
TABLE1: dict[str, tuple[Callable, tuple[int, ...], list[tuple[int, int, str, Callable]]]] = {
    "network 1": (network1, (1, 2, 3, 4, 5, 6), [
        (1, 2, "a", lambda a, b, c, d, e, f: a),
        (1, 3, "b", lambda a, b, c, d, e, f: b),
        (1, 1, "-(a+b+c)", lambda a, b, c, d, e, f: -(a + b + c)),
        (2, 2, "-a(2a+b+c)-ad", lambda a, b, c, d, e, f: -a * (2 * a + b + c) - a * d),
        (2, 3, "-ab-bc-be-2b^2", lambda a, b, c, d, e, f: -a * b - b * c - b * e - 2 * b**2),
        (3, 1, "-4a^3-5a^2b-...-fc^2", lambda a, b, c, d, e, f: (
            -4 * a**3 - 5 * a**2 * b - 5 * a**2 * c - d * a**2 - 5 * a * b**2 - 6 * a * b * c
            - 5 * a * c**2 - 4 * b**3 - 5 * b**2 * c - e * b**2 - 5 * b * c**2 - 4 * c**3 - f * c**2)),
    ]),
    # diagonal entries of the negated Laplacian are negative: [L]_{1,1} = -a
    "network 2": (network2, (1, 2, 3, 4), [
        (1, 1, "-a", lambda a, b, c, d: -a),
        (3, 1, "-4a^3-ba^2", lambda a, b, c, d: -4 * a**3 - b * a**2),
        (5, 1, "-16a^5-...-ca^2b^2", lambda a, b, c, d: (
            -16 * a**5 - 12 * a**4 * b - 9 * a**3 * b**2 - 4 * a**2 * b**3 - c * a**2 * b**2)),
        (7, 1, "-64a^7-...-9a^2b^3c^2", lambda a, b, c, d: (
            -64 * a**7 - 80 * a**6 * b - 73 * a**4 * b**3 - 12 * a**4 * b**2 * c - 44 * a**3 * b**4
            - 8 * a**3 * b**2 * c**2 - 16 * a**2 * b**5 - 12 * a**2 * b**4 * c - 4 * a**2 * b**2 * c**3
            - d * a**2 * b**2 * c**2 - 88 * a**5 * b**2 - 18 * a**3 * b**3 * c - 9 * a**2 * b**3 * c**2)),
    ]),
    "network 3": (network3, (1, 2, 3), [
        (1, 2, "a", lambda a, b, c: a),
        (1, 3, "b", lambda a, b, c: b),
        (1, 1, "-a-b-c", lambda a, b, c: -a - b - c),
    ]),
}

TABLE1_SENSORS = {"network 1": 3, "network 2": 1, "network 3": 3}


def demo_table1() -> list[Check]:
    checks = []
    for name, (build, params, rows) in TABLE1.items():
        tree = build(*params)
        L = laplacian_matrix(tree)
        col = tree.index(tree.root)
        sensors = place_sensors(tree)
        checks.append(Check(f"{name}: placement size N = {TABLE1_SENSORS[name]}",
                            len(sensors) == TABLE1_SENSORS[name], f"sensors {sorted(sensors)}"))
        for k, i, text, f in rows:
            direct = np.linalg.matrix_power(L, k)[tree.index(i), col]
            listed = f(*params)
            err = abs(direct - listed) / max(abs(direct), 1e-300)
            ok = err <= TABLE_RTOL and i in sensors
            checks.append(Check(f"{name}: [L^{k}]_{{{i},1}} = {text}", ok, f"{listed:.10g}"))
    return checks


def demo_fig1() -> list[Check]:
    return [Check(label, ok, detail) for label, ok, detail in figure1_demo().checks]


def demo_star(sizes=range(4, 8), seed: int = 42, attempts: int = 32) -> list[Check]:
    checks = []
    tree = network3(1.0, 2.0, 3.0)
    W = tree.weights
    cex = search_counterexample(tree, W, [1, 2], attempts=attempts, seed=seed)
    swapped = swap_weights(tree, W, (1, 3), (1, 4))
    ok = cex is not None and np.array_equal(cex.weights, swapped)
    checks.append(Check("star sensors {1,2}: swapping b and c is a counterexample", ok,
                        "none found" if cex is None else f"W' = {np.round(cex.weights, 6).tolist()}"))
    cex = search_counterexample(tree, W, [2, 3], attempts=attempts, seed=seed)
    checks.append(Check("star sensors {2,3}: no counterexample found", cex is None))
    for n in sizes:
        res = analyze_star(n, seed=seed, attempts=attempts)
        checks.append(Check(f"star n={n}: minimal sensor count = n-2 = {n - 2}", res.minimum == n - 2,
                            f"found {res.minimum}, witness {list(res.witness)}"))
    return checks


def demo_t1(seed: int = 42) -> list[Check]:
    tree = t1_tree()
    checks = []
    s = place_sensors(tree)
    checks.append(Check("placement {1,3,4}", s == {1, 3, 4}, f"sensors {sorted(s)}"))
    every = [sorted(x) for x in enumerate_placements(tree)]
    want = [[1, 3, 4], [1, 3, 6], [1, 4, 5], [1, 5, 6]]
    checks.append(Check("all placements {1,3,4} {1,3,6} {1,5,4} {1,5,6}", every == want, f"{len(every)} sets"))
    checks.append(Check("sensor count = non-input leaves {3,4,6}",
                        predicted_sensor_count(tree) == len(s) and non_input_leaves(tree) == {3, 4, 6}))
    q = markov_parameters(build_system(tree, s))
    rec = recover_weights(tree, s, q)
    err = max_relative_error(rec.tree, tree)
    checks.append(Check("exact Markov parameters recover all five weights", err < 1e-9, f"max rel err {err:.1e}"))
    run = identify_end_to_end(tree, dt=0.01, steps=400, seed=seed)
    checks.append(Check("simulated pulse response recovers weights within 1e-4", run.max_relative_error < 1e-4,
                        f"max rel err {run.max_relative_error:.1e}"))
    return checks


DEMOS: dict[str, Callable[..., list[Check]]] = {
    "fig1": demo_fig1,
    "table1": demo_table1,
    "star": demo_star,
    "t1": demo_t1,
}
