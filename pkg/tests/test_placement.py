import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treeid.placement import (
    enumerate_placements,
    is_valid_placement,
    place_sensors,
    predicted_sensor_count,
)
from treeid.tree import WeightedTree, parse_tree, random_tree


def test_t1_placement(t1):
    assert place_sensors(t1) == {1, 3, 4}
    assert predicted_sensor_count(t1) == 3


def test_t1_all_placements(t1):
    got = [tuple(sorted(s)) for s in enumerate_placements(t1)]
    assert got == [(1, 3, 4), (1, 3, 6), (1, 4, 5), (1, 5, 6)]


def test_path_needs_only_root():
    tree = WeightedTree.path([1, 2, 3, 4])
    assert place_sensors(tree) == {1}
    assert enumerate_placements(tree) == [frozenset({1})]


def test_star_placements(star3):
    assert place_sensors(star3) == {1, 2, 3}
    assert len(enumerate_placements(star3)) == 3
    big = WeightedTree.star([1.0] * 6)
    assert predicted_sensor_count(big) == 6
    assert len(enumerate_placements(big)) == 6


def test_two_node_tree():
    tree = parse_tree("root 1\nedge 1 2 1")
    assert place_sensors(tree) == {1}
    assert predicted_sensor_count(tree) == 1


def test_single_node_count_mismatch():
    # the root is always sensed, but a lone root is not a non-input leaf
    tree = parse_tree("root 1")
    assert place_sensors(tree) == {1}
    assert predicted_sensor_count(tree) == 0


def test_enumeration_guard():
    tree = WeightedTree.star([1.0] * 10)
    with pytest.raises(ValueError, match="exceed"):
        enumerate_placements(tree, limit=5)


def test_is_valid_placement(t1):
    assert is_valid_placement(t1, {1, 5, 6})
    assert not is_valid_placement(t1, {3, 4})
    assert not is_valid_placement(t1, {1, 3})
    assert not is_valid_placement(t1, {1, 3, 4, 6})
    assert not is_valid_placement(t1, {1, 3, 4, 2})


def test_root_not_node_one():
    tree = parse_tree("root 5\nedge 5 1 1\nedge 5 2 1\nedge 2 3 1\nedge 2 4 1")
    assert place_sensors(tree) == {5, 1, 3}


def test_sensor_count_500_trees():
    rng = np.random.default_rng(3)
    for _ in range(500):
        tree = random_tree(int(rng.integers(2, 41)), rng)
        assert len(place_sensors(tree)) == predicted_sensor_count(tree)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 12), seed=st.integers(0, 2**32 - 1))
def test_enumeration_properties(n, seed):
    tree = random_tree(n, np.random.default_rng(seed))
    sets = enumerate_placements(tree)
    size = len(place_sensors(tree))
    assert all(len(s) == size for s in sets)
    assert place_sensors(tree) in sets
    assert all(tree.root in s for s in sets)
    assert all(is_valid_placement(tree, s) for s in sets)
    assert len(set(sets)) == len(sets)
