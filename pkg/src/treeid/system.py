"""Consensus system triple, Markov parameters and transfer function."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .tree import WeightedTree

RTOL = 1e-9
ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class ConsensusSystem:
    """``x' = Lx + Bu, y = Cx`` with ``L`` the negated weighted Laplacian.

    Attributes
    ----------
    tree : WeightedTree
    sensors : tuple of int
        Measured node ids, ascending. Row ``i`` of ``C`` measures ``sensors[i]``.
    L : (n, n) ndarray
        System matrix (``-Laplacian``); zero row sums, symmetric.
    B : (n,) ndarray
        Indicator of the root (input node).
    C : (h, n) ndarray
        Row indicators of the sensed nodes.
    """

    tree: WeightedTree
    sensors: tuple[int, ...]
    L: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @property
    def n(self) -> int:
        return self.tree.n

    @property
    def sensor_index(self) -> np.ndarray:
        return np.array([self.tree.index(s) for s in self.sensors], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class MarkovSequence:
    """``Q_j = C L^j B`` for ``j = 0..m-1``; ``values[j, i]`` belongs to ``sensors[i]``."""

    sensors: tuple[int, ...]
    values: np.ndarray

    @property
    def horizon(self) -> int:
        return self.values.shape[0]

    def column(self, sensor: int) -> np.ndarray:
        return self.values[:, self.sensors.index(sensor)]

    def __getitem__(self, j):
        return self.values[j]


@dataclass(frozen=True, eq=False)
class TransferFunction:
    """``H(s) = num(s) / den(s)`` per sensor, in raw (unreduced) n-th order form.

    ``den`` holds ``[1, a_1, ..., a_n]`` and ``num[i]`` holds
    ``[b_1, ..., b_n]`` for ``sensors[i]`` (highest power ``s^{n-1}`` first).
    """

    sensors: tuple[int, ...]
    den: np.ndarray
    num: np.ndarray

    def __call__(self, s: complex) -> np.ndarray:
        return np.array([np.polyval(b, s) for b in self.num]) / np.polyval(self.den, s)


def laplacian_matrix(tree: WeightedTree) -> np.ndarray:
    """Dense system matrix ``-Laplacian`` in ascending-id order."""
    n = tree.n
    M = np.zeros((n, n))
    eu, ev = tree.edge_arrays
    M[eu, ev] = tree.weights
    M[ev, eu] = tree.weights
    M[np.arange(n), np.arange(n)] = -M.sum(axis=1)
    return M


def build_system(tree: WeightedTree, sensors: Iterable[int]) -> ConsensusSystem:
    sensors = tuple(sorted(set(int(s) for s in sensors)))
    if not sensors:
        raise ValueError("sensor set is empty")
    for s in sensors:
        if s not in tree._index:
            raise ValueError(f"sensor {s} is not a node of the tree")
    n = tree.n
    B = np.zeros(n)
    B[tree.index(tree.root)] = 1.0
    C = np.zeros((len(sensors), n))
    C[np.arange(len(sensors)), [tree.index(s) for s in sensors]] = 1.0
    return ConsensusSystem(tree, sensors, laplacian_matrix(tree), B, C)


def power_columns(tree: WeightedTree, horizon: int) -> np.ndarray:
    """``(horizon, n)`` array whose row ``k`` is ``L^k e_root`` (iterated products)."""
    eu, ev = tree.edge_arrays
    return _kernels.power_columns(eu, ev, tree.weights, tree.n, tree.index(tree.root), horizon)


def markov_parameters(system: ConsensusSystem, horizon: int | None = None) -> MarkovSequence:
    """Markov parameters up to ``horizon`` (default ``2n``)."""
    m = 2 * system.n if horizon is None else int(horizon)
    if m < 1:
        raise ValueError("horizon must be >= 1")
    cols = power_columns(system.tree, m)
    return MarkovSequence(system.sensors, cols[:, system.sensor_index])


def laplacian_power_column(system: ConsensusSystem, k: int) -> np.ndarray:
    """The column ``L^k e_root``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return power_columns(system.tree, k + 1)[k]


def _faddeev_leverrier(A: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    # det(sI - A) = s^n + c_1 s^{n-1} + ... + c_n,
    # adj(sI - A) = sum_k M_k s^{n-k},  M_1 = I,  M_{k+1} = A M_k + c_k I
    n = A.shape[0]
    c = np.zeros(n + 1)
    c[0] = 1.0
    I = np.eye(n)
    M = I.copy()
    Ms = []
    for k in range(1, n + 1):
        Ms.append(M)
        AM = A @ M
        c[k] = -np.trace(AM) / k
        M = AM + c[k] * I
    return c, Ms


def characteristic_polynomial(system: ConsensusSystem) -> np.ndarray:
    """``[1, a_1, ..., a_n]`` with ``det(sI - L) = s^n + a_1 s^{n-1} + ... + a_n``."""
    return _faddeev_leverrier(system.L)[0]


def transfer_function(system: ConsensusSystem) -> TransferFunction:
    den, Ms = _faddeev_leverrier(system.L)
    num = np.array([[row @ M @ system.B for M in Ms] for row in system.C])
    return TransferFunction(system.sensors, den, num)


def relative_gaps(a: np.ndarray, b: np.ndarray, floor: float = ATOL / RTOL) -> np.ndarray:
    """Per-index gap ``max_i |a_ji - b_ji| / max(|a_j|_inf, |b_j|_inf, floor)``.

    With the default floor, ``gap <= RTOL`` is the same test as
    ``|diff| <= max(RTOL * scale, ATOL)``. Symmetric in ``a`` and ``b``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 1:
        a, b = a[:, None], b[:, None]
    num = np.max(np.abs(a - b), axis=1)
    scale = np.maximum(np.maximum(np.max(np.abs(a), axis=1), np.max(np.abs(b), axis=1)), floor)
    return num / scale


def markov_jacobian(tree: WeightedTree, sensors, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    """Markov parameters and their derivatives with respect to the edge weights.

    Returns ``Q`` of shape ``(horizon, h)`` and ``dQ`` of shape
    ``(horizon, h, E)`` with ``dQ[j, i, e] = d Q_j[i] / d w_e`` (edges in
    ``tree.edges`` order), from the tangent recursion
    ``D_{j+1} = L D_j + (dL/dw_e) x_j``.
    """
    n = tree.n
    E = len(tree.edges)
    Lm = laplacian_matrix(tree)
    eu, ev = tree.edge_arrays
    cols = np.arange(E)
    si = np.array([tree.index(s) for s in sensors], dtype=np.int64)
    x = np.zeros(n)
    x[tree.index(tree.root)] = 1.0
    D = np.zeros((n, E))
    Q = np.empty((horizon, len(si)))
    dQ = np.empty((horizon, len(si), E))
    for j in range(horizon):
        Q[j] = x[si]
        dQ[j] = D[si]
        g = x[ev] - x[eu]
        G = np.zeros((n, E))
        G[eu, cols] = g
        G[ev, cols] = -g
        D = Lm @ D + G
        x = Lm @ x
    return Q, dQ
