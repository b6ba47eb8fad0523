"""Hierarchical sensor placement for rooted trees."""
from __future__ import annotations

import itertools
import math

from .tree import SiblingGroup, WeightedTree, non_input_leaves, sibling_groups

MAX_ENUMERATION = 10**6


def all_sibling_groups(tree: WeightedTree) -> list[SiblingGroup]:
    """Sibling groups of every generation, root side first."""
    return [g for level in range(1, tree.height + 1) for g in sibling_groups(tree, level)]


def place_sensors(tree: WeightedTree) -> frozenset[int]:
    """Sense the root, then all but one child of every sibling group.

    The child left unsensed is the one with the highest id, so the result
    is deterministic. Groups with a single child contribute no sensor.
    """
    sensors = {tree.root}
    for g in all_sibling_groups(tree):
        sensors.update(g.children[:-1])
    return frozenset(sensors)


def enumerate_placements(tree: WeightedTree, limit: int = MAX_ENUMERATION) -> list[frozenset[int]]:
    """Every set :func:`place_sensors` could produce under some tie-break.

    Returned sorted by the ascending-id tuple of each set.
    """
    groups = [g for g in all_sibling_groups(tree) if len(g.children) > 1]
    total = math.prod(len(g.children) for g in groups)
    if total > limit:
        raise ValueError(f"{total} placements exceed the enumeration limit {limit}")
    out = []
    for omitted in itertools.product(*(g.children for g in groups)):
        s = {tree.root}
        for g, skip in zip(groups, omitted):
            s.update(c for c in g.children if c != skip)
        out.append(frozenset(s))
    return sorted(out, key=lambda s: tuple(sorted(s)))


def predicted_sensor_count(tree: WeightedTree) -> int:
    """Number of non-input leaves, which equals the size of the placement."""
    return len(non_input_leaves(tree))


def is_valid_placement(tree: WeightedTree, sensors) -> bool:
    """True when ``sensors`` holds the root and exactly ``|G|-1`` children of each group."""
    sensors = set(sensors)
    if tree.root not in sensors or not sensors <= set(tree.nodes):
        return False
    expected = 1
    for g in all_sibling_groups(tree):
        hit = sum(c in sensors for c in g.children)
        if hit != len(g.children) - 1:
            return False
        expected += hit
    return len(sensors) == expected
