"""Edge-weight recovery from Markov parameters.

Generations are processed from the root down. For a node ``q`` at depth
``k`` with children ``c_1..c_s`` (all but at most one of them sensed) the
column ``x_v[i] = [L^i]_{v,root}`` is known for ``q`` (measured, or derived
earlier) and for its parent. Because ``x_v[i] = 0`` for ``i < depth(v)``
and ``x_v[depth(v)]`` is the product of the weights on the root path:

* a sensed child gives ``w(q, c) = x_c[k+1] / x_q[k]``;
* the unsensed child follows from the diagonal entry
  ``L_qq = (x_q[k+1] - w(q, parent) x_parent[k]) / x_q[k]`` and
  ``L_qq = -(sum of all weights at q)``;
* its column then follows from one row of ``x[i+1] = L x[i]`` solved for
  the single unknown entry, which makes it usable at the next generation.

Those steps use only a few entries of the data and amplify rounding along
chains of unsensed nodes, so by default the constructive solution is then
refined by least squares over every Markov entry (``polish=True``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy.optimize import least_squares

from .system import (
    MarkovSequence,
    build_system,
    markov_jacobian,
    markov_parameters,
)
from .tree import Edge, WeightedTree, edge_key, generations, path_weight

MAX_DEPTH = 24
MIN_DIVISOR = 1e-280
ENTRY_FLOOR = 1e-6


class RecoveryError(ValueError):
    """Markov data inconsistent with the topology, or sensors unusable."""


@dataclass
class AvailabilityTable:
    """Known columns ``[L^i]_{v,root}``, keyed by node id.

    ``status[v]`` is ``"sensor"`` (copied from the data), ``"available"``
    (derived) or ``"pending"``.
    """

    columns: dict[int, np.ndarray] = field(default_factory=dict)
    status: dict[int, str] = field(default_factory=dict)

    def column(self, v: int) -> np.ndarray:
        if self.status.get(v) not in ("sensor", "available"):
            raise RecoveryError(
                f"no column for node {v}; sensors do not form a valid placement"
            )
        return self.columns[v]


@dataclass
class RecoveredWeights:
    """Recovered tree plus diagnostics.

    ``residual`` is the largest relative defect, entry by entry, between the
    input Markov data and the Markov parameters of the recovered tree
    (entries below ``ENTRY_FLOOR`` times the largest entry of the same index
    are compared against that floor instead). ``path_check`` compares every derived column at
    the node's own depth with the product of recovered weights on its root
    path; it measures rounding in the column recursion.
    """

    tree: WeightedTree
    residual: float
    path_check: float
    table: AvailabilityTable = field(repr=False)

    @property
    def values(self) -> dict[Edge, float]:
        return self.tree.weight_map()


def _initial_table(tree: WeightedTree, markov: MarkovSequence) -> AvailabilityTable:
    table = AvailabilityTable()
    for v in tree.nodes:
        table.status[v] = "pending"
    for s in markov.sensors:
        table.columns[s] = np.array(markov.column(s), dtype=float)
        table.status[s] = "sensor"
    return table


def extend_availability(
    table: AvailabilityTable,
    tree: WeightedTree,
    parent: int,
    weights: Mapping[Edge, float],
    target: int,
    *,
    min_divisor: float = MIN_DIVISOR,
) -> AvailabilityTable:
    """Derive the column of ``target`` (a child of ``parent``) in place.

    Needs every weight incident to ``parent`` in ``weights`` and the columns
    of ``parent``, its own parent and its other children in ``table``.
    """
    w = {}
    for nb in tree.adjacency[parent]:
        key = edge_key(parent, nb)
        if key not in weights:
            raise RecoveryError(f"weight of edge {key[0]}-{key[1]} not recovered yet")
        w[nb] = weights[key]
    if w[target] <= min_divisor:
        raise RecoveryError(f"divisor weight {w[target]:.3g} on edge {parent}-{target}")
    diag = -sum(w.values())
    xp = table.column(parent)
    others = [nb for nb in tree.adjacency[parent] if nb != target]
    length = len(xp) - 1
    for nb in others:
        length = min(length, len(table.column(nb)))
    num = xp[1 : length + 1] - diag * xp[:length]
    for nb in others:
        num = num - w[nb] * table.column(nb)[:length]
    col = num / w[target]
    # structural zeros below the target's depth
    col[: min(tree.depth[target], length)] = 0.0
    table.columns[target] = col
    table.status[target] = "available"
    return table


def recover_weights(
    tree: WeightedTree,
    sensors: Iterable[int] | None,
    markov: MarkovSequence,
    *,
    min_divisor: float = MIN_DIVISOR,
    polish: bool = True,
    reverse_groups: bool = False,
) -> RecoveredWeights:
    """Recover every edge weight of ``tree`` from exact Markov parameters.

    Parameters
    ----------
    tree : WeightedTree
        Topology; its weights are ignored.
    sensors : iterable of int or None
        Must equal ``markov.sensors`` (``None`` takes them from ``markov``).
        The set has to contain the root and all but at most one child of
        every sibling group, as a placement from
        :func:`treeid.placement.place_sensors` does.
    markov : MarkovSequence
        At least ``2n`` terms.
    polish : bool
        Refine the constructive solution by Gauss-Newton on all Markov
        entries (log-weights, entries scaled as for ``residual``).
    reverse_groups : bool
        Visit sibling groups of a generation in descending parent order.
        The result does not depend on it; exposed for testing.

    Returns
    -------
    RecoveredWeights
        The tree with recovered weights and ``residual``, the largest
        relative defect between the data and the Markov parameters of the
        recovered tree (plus the path-weight cross-check).
    """
    if sensors is not None and tuple(sorted(set(sensors))) != tuple(markov.sensors):
        raise RecoveryError(
            f"sensor list {sorted(set(sensors))} does not match Markov data {list(markov.sensors)}"
        )
    n = tree.n
    if markov.horizon < 2 * n:
        raise RecoveryError(f"horizon {markov.horizon} < 2n = {2 * n}")
    if not set(markov.sensors) <= set(tree.nodes):
        raise RecoveryError("Markov data names sensors outside the tree")
    if tree.root not in markov.sensors:
        raise RecoveryError(f"root {tree.root} must be sensed")
    if tree.height > MAX_DEPTH:
        raise RecoveryError(f"tree depth {tree.height} exceeds {MAX_DEPTH}")
    if not np.all(np.isfinite(markov.values)):
        raise RecoveryError("Markov data contains non-finite values")

    table = _initial_table(tree, markov)
    sensed = set(markov.sensors)
    weights: dict[Edge, float] = {}
    for k, level in enumerate(generations(tree)):
        parents = [q for q in level if tree.children[q]]
        if reverse_groups:
            parents.reverse()
        for q in parents:
            _recover_group(table, tree, q, k, sensed, weights, min_divisor)

    out = tree.with_weights(weights)
    if polish and out.edges:
        out = out.with_weights(_polish(out, markov))
        table = _rebuild_table(out, markov, min_divisor)
    model = markov_parameters(build_system(out, markov.sensors), markov.horizon)
    residual = float(np.max(np.abs(model.values - markov.values) / _entry_scale(markov.values)))
    return RecoveredWeights(out, residual, _path_check(out, table), table)


def _recover_group(table, tree, q, k, sensed, weights, min_divisor):
    xq = table.column(q)
    if len(xq) < k + 2:
        raise RecoveryError(f"column of node {q} too short at depth {k}")
    pw = xq[k]
    if not pw > min_divisor:
        raise RecoveryError(f"path weight {pw:.3g} at node {q} is not positive")
    children = tree.children[q]
    seen = [c for c in children if c in sensed]
    unseen = [c for c in children if c not in sensed]
    if len(unseen) > 1:
        raise RecoveryError(
            f"children {unseen} of node {q} are unsensed; at most one per group is allowed"
        )
    for c in seen:
        w = table.column(c)[k + 1] / pw
        if not w > 0:
            raise RecoveryError(f"recovered weight {w:.3g} on edge {q}-{c} is not positive")
        weights[edge_key(q, c)] = w
    if not unseen:
        return
    up = tree.parent[q]
    if up is None:
        upward = 0.0
        w_up = 0.0
    else:
        w_up = weights[edge_key(q, up)]
        upward = w_up * table.column(up)[k]
    diag = (xq[k + 1] - upward) / pw
    s = unseen[0]
    w = -diag - w_up - sum(weights[edge_key(q, c)] for c in seen)
    if not w > 0:
        raise RecoveryError(f"recovered weight {w:.3g} on edge {q}-{s} is not positive")
    weights[edge_key(q, s)] = w
    extend_availability(table, tree, q, weights, s, min_divisor=min_divisor)


def _rebuild_table(tree: WeightedTree, markov: MarkovSequence, min_divisor: float) -> AvailabilityTable:
    # derived columns recomputed from the final weights
    table = _initial_table(tree, markov)
    weights = tree.weight_map()
    for level in generations(tree):
        for q in level:
            for c in tree.children[q]:
                if table.status[c] == "pending":
                    extend_availability(table, tree, q, weights, c, min_divisor=min_divisor)
    return table


def _polish(tree: WeightedTree, markov: MarkovSequence) -> np.ndarray:
    data = markov.values
    scale = _entry_scale(data)
    theta0 = np.log(tree.weights)

    def fun(theta):
        Q, _ = markov_jacobian(tree.with_weights(np.exp(theta)), markov.sensors, markov.horizon)
        return ((Q - data) / scale).ravel()

    def jac(theta):
        w = np.exp(theta)
        _, dQ = markov_jacobian(tree.with_weights(w), markov.sensors, markov.horizon)
        return (dQ / scale[:, :, None]).reshape(-1, len(w)) * w

    # local refinement only: stay within a factor 10 of the constructive weights
    with np.errstate(over="ignore", invalid="ignore"):
        sol = least_squares(
            fun, theta0, jac=jac, bounds=(theta0 - 2.3, theta0 + 2.3),
            method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15,
        )
    if not np.all(np.isfinite(sol.x)) or sol.cost > 0.5 * float(np.sum(fun(theta0) ** 2)):
        return tree.weights
    return np.exp(sol.x)


def _entry_scale(values: np.ndarray) -> np.ndarray:
    # each entry relative to itself, floored at ENTRY_FLOOR of its index's largest entry
    row = np.max(np.abs(values), axis=1, keepdims=True)
    return np.maximum(np.abs(values), np.maximum(ENTRY_FLOOR * row, 1e-300))


def _path_check(tree: WeightedTree, table: AvailabilityTable) -> float:
    worst = 0.0
    for v, status in table.status.items():
        if status == "available":
            expected = path_weight(tree, v, tree.root)
            worst = max(worst, abs(table.columns[v][tree.depth[v]] - expected) / expected)
    return worst


def max_relative_error(estimate: WeightedTree, truth: WeightedTree) -> float:
    if estimate.edges != truth.edges:
        raise ValueError("trees have different edge sets")
    if not truth.edges:
        return 0.0
    return float(np.max(np.abs(estimate.weights - truth.weights) / truth.weights))

