import math

import numpy as np
import pytest

from treeid.oracle import (
    SEARCH_GAP_TOL,
    analyze_star,
    figure1_demo,
    figure1_weights,
    indistinguishable,
    markov_gaps,
    permutation_probes,
    search_counterexample,
    star_minimum_analysis,
    swap_weights,
)
from treeid.placement import place_sensors
from treeid.tree import WeightedTree, random_tree


def test_reflexive(t1):
    rep = indistinguishable(t1, t1.weights, t1.weights, [1, 3, 4])
    assert rep.indistinguishable
    assert rep.max_markov_gap == 0.0
    assert rep.first_differing_index is None
    assert rep.horizon == 12


def test_symmetric_and_differing_index(t1):
    w2 = t1.weights * np.array([1, 1, 1, 1, 1.01])
    a = indistinguishable(t1, t1.weights, w2, [1, 3, 4])
    b = indistinguishable(t1, w2, t1.weights, [1, 3, 4])
    assert a == b
    assert a.verdict == "distinguishable"
    # w56 first shows at the root two steps after the sibling branch appears
    assert a.first_differing_index == 4


def test_star_swap_indistinguishable(star3):
    w2 = swap_weights(star3, star3.weights, (1, 3), (1, 4))
    np.testing.assert_array_equal(w2, [1, 3, 2])
    assert indistinguishable(star3, star3.weights, w2, [1, 2]).indistinguishable
    assert not indistinguishable(star3, star3.weights, w2, [1, 2, 3]).indistinguishable


@pytest.mark.parametrize("p, q, r", [(3.0, 2.0, 1.0), (0.5, 1.5, 4.0), (2 + math.sqrt(7) / 2, 2.0, 2 - math.sqrt(7) / 2)])
def test_path_reversal(p, q, r):
    tree = WeightedTree.path([p, q, r])
    rep = indistinguishable(tree, [p, q, r], [r, q, p], [4], horizon=9)
    assert rep.indistinguishable


def test_search_star_sensors_23(star3):
    assert search_counterexample(star3, star3.weights, [2, 3], attempts=32, seed=42) is None


def test_search_star_sensors_12(star3):
    cex = search_counterexample(star3, star3.weights, [1, 2], attempts=32, seed=42)
    assert cex is not None
    assert cex.method.startswith("permutation")
    np.testing.assert_array_equal(cex.weights, [1, 3, 2])
    assert cex.gap < 1e-9 and cex.distance >= 0.1


def test_search_unrooted_star_case():
    # four children, two of them sensed, root unsensed
    tree = WeightedTree.star([1.0, 2.0, 3.0, 4.0])
    cex = search_counterexample(tree, tree.weights, [2, 3], attempts=4, seed=0)
    assert cex is not None and cex.method.startswith("permutation")
    np.testing.assert_array_equal(cex.weights, [1, 2, 4, 3])


def test_search_finds_non_permutation_counterexample():
    w, _ = figure1_weights()
    tree = WeightedTree.path(w)
    cex = search_counterexample(tree, w, [4], attempts=8, seed=42)
    assert cex is not None
    assert cex.method == "optimization"
    assert cex.gap <= SEARCH_GAP_TOL
    assert cex.distance >= 0.1
    # same three symmetric functions as the reference weights
    p, q, r = cex.weights
    assert abs((p + q + r) - 6) < 1e-6
    assert abs(p * q * r - 4.5) < 1e-6
    assert abs(3 * q * (p + r) + 4 * p * r - 33) < 1e-5


def test_search_is_deterministic():
    w, _ = figure1_weights()
    tree = WeightedTree.path(w)
    a = search_counterexample(tree, w, [4], attempts=8, seed=5)
    b = search_counterexample(tree, w, [4], attempts=8, seed=5)
    np.testing.assert_array_equal(a.weights, b.weights)


def test_search_rejects_zero_attempts(star3):
    with pytest.raises(ValueError):
        search_counterexample(star3, star3.weights, [1], attempts=0)


def _unsensed_permutation(rng, k):
    """Star with ``k`` leaves, root and two or more leaves unsensed, and a
    weight vector permuted within the unsensed leaves."""
    tree = WeightedTree.star(rng.uniform(0.5, 5.0, size=k))
    leaves = np.arange(2, k + 2)
    sensed = sorted(int(x) for x in rng.choice(leaves, size=int(rng.integers(0, k - 1)), replace=False))
    free = [tree.edge_index(1, int(v)) for v in leaves if v not in sensed]
    w2 = tree.weights.copy()
    w2[free] = tree.weights[rng.permutation(free)]
    return tree, w2, sensed


def test_permuting_unsensed_star_leaves():
    rng = np.random.default_rng(4)
    for _ in range(50):
        tree, w2, sensed = _unsensed_permutation(rng, int(rng.integers(3, 8)))
        if not sensed:
            continue
        # equal up to summation order in the root's diagonal
        assert markov_gaps(tree, tree.weights, w2, sensed).max() <= 1e-14


def test_probes_include_unsensed_sibling_swaps():
    tree = WeightedTree.star([1.0, 2.0, 3.0, 4.0, 5.0])
    exact = [w for _, w in permutation_probes(tree, tree.weights, [2, 3])
             if markov_gaps(tree, tree.weights, w, [2, 3]).max() <= 1e-14]
    # swaps among the unsensed leaves 4, 5, 6
    assert len(exact) == 3


def test_indistinguishable_pairs_extend_to_longer_horizon():
    rng = np.random.default_rng(5)
    checked = 0
    while checked < 50:
        tree, w2, sensed = _unsensed_permutation(rng, int(rng.integers(3, 7)))
        if not sensed or np.array_equal(w2, tree.weights):
            continue
        n = tree.n
        assert indistinguishable(tree, tree.weights, w2, sensed, horizon=2 * n).indistinguishable
        assert indistinguishable(tree, tree.weights, w2, sensed, horizon=4 * n).indistinguishable
        checked += 1


def test_placement_probe_random_trees():
    rng = np.random.default_rng(11)
    for i in range(100):
        tree = random_tree(int(rng.integers(2, 8)), rng, weight_range=(0.5, 5.0))
        assert len(set(tree.weights)) == len(tree.weights)
        assert search_counterexample(tree, tree.weights, place_sensors(tree), attempts=2, seed=i) is None


def test_star_minimum_small():
    res = analyze_star(4, seed=42)
    assert res.minimum == 2
    assert res.witness == (2, 3)
    assert all(found for _, found in res.history[1])


def test_star_minimum_five():
    res = analyze_star(5, [1, 2, 3, 4], seed=42)
    assert res.minimum == 3
    # every 2-subset admits a counterexample
    assert len(res.history[2]) == 10 and all(found for _, found in res.history[2])
    assert star_minimum_analysis(5, [1, 2, 3, 4]) == 3


def test_star_analysis_needs_three_nodes():
    with pytest.raises(ValueError):
        analyze_star(2)


def test_figure1_demo():
    rep = figure1_demo()
    assert rep.passed
    np.testing.assert_allclose(rep.transfer[0].den, [1, 12, 33, 18, 0], atol=1e-9)
    np.testing.assert_allclose(rep.transfer[1].num[0], [0, 0, 0, 4.5], atol=1e-9)
    assert abs(rep.distance - math.sqrt(7)) < 1e-12
