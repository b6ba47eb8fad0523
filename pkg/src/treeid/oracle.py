"""Distinguishability of weight assignments and counterexample search.

Two weight assignments on the same tree are indistinguishable for a sensor
set exactly when their Markov parameters agree at every order; with
horizon ``2n`` that is decided from finitely many terms. Equality is
tested numerically, so every verdict carries a tolerance, and a search
that finds nothing is inconclusive rather than a proof of identifiability.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .system import (
    RTOL,
    TransferFunction,
    build_system,
    markov_parameters,
    relative_gaps,
    transfer_function,
)
from .tree import WeightedTree, edge_key

SEARCH_GAP_TOL = 1e-7
MIN_DISTANCE = 0.1
PENALTY = 1.0


@dataclass(frozen=True)
class DistinguishabilityReport:
    verdict: str
    first_differing_index: int | None
    max_markov_gap: float
    horizon: int
    tolerance: float

    @property
    def indistinguishable(self) -> bool:
        return self.verdict == "indistinguishable"


@dataclass(frozen=True)
class Counterexample:
    """A weight vector (aligned with ``tree.edges``) matching the reference output."""

    weights: np.ndarray
    gap: float
    distance: float
    method: str


def as_weights(tree: WeightedTree, W) -> np.ndarray:
    """Weight vector aligned with ``tree.edges`` from an array, mapping or tree."""
    if isinstance(W, WeightedTree):
        if W.edges != tree.edges:
            raise ValueError("weight tree has a different edge set")
        return np.array(W.weights)
    if isinstance(W, Mapping):
        return np.array([W[e] if e in W else W[e[::-1]] for e in tree.edges], dtype=float)
    w = np.asarray(W, dtype=float).reshape(-1)
    if w.shape[0] != len(tree.edges):
        raise ValueError(f"expected {len(tree.edges)} weights, got {w.shape[0]}")
    if not np.all(w > 0):
        raise ValueError("weights must be positive")
    return w


def markov_gaps(tree: WeightedTree, W, W2, sensors, horizon: int | None = None) -> np.ndarray:
    """Relative Markov-parameter gap at each order ``j < horizon``."""
    m = 2 * tree.n if horizon is None else horizon
    q1 = markov_parameters(build_system(tree.with_weights(as_weights(tree, W)), sensors), m)
    q2 = markov_parameters(build_system(tree.with_weights(as_weights(tree, W2)), sensors), m)
    return relative_gaps(q1.values, q2.values)


def indistinguishable(
    tree: WeightedTree,
    W,
    W2,
    sensors: Iterable[int],
    *,
    horizon: int | None = None,
    tol: float = RTOL,
) -> DistinguishabilityReport:
    """Compare two weight assignments through their Markov parameters."""
    sensors = tuple(sorted(set(sensors)))
    m = 2 * tree.n if horizon is None else int(horizon)
    gaps = markov_gaps(tree, W, W2, sensors, m)
    bad = np.flatnonzero(gaps > tol)
    return DistinguishabilityReport(
        verdict="distinguishable" if bad.size else "indistinguishable",
        first_differing_index=int(bad[0]) if bad.size else None,
        max_markov_gap=float(gaps.max()) if gaps.size else 0.0,
        horizon=m,
        tolerance=tol,
    )


# ---------------------------------------------------------------------------
# permutation probes
# ---------------------------------------------------------------------------

def _shape(tree: WeightedTree, v: int) -> str:
    return "(" + "".join(sorted(_shape(tree, c) for c in tree.children[v])) + ")"


def _match_subtrees(tree: WeightedTree, a: int, b: int) -> list[tuple[int, int]] | None:
    """Node pairing of two isomorphic rooted subtrees (``None`` if not isomorphic)."""
    if _shape(tree, a) != _shape(tree, b):
        return None
    pairs = [(a, b)]
    ca = sorted(tree.children[a], key=lambda c: _shape(tree, c))
    cb = sorted(tree.children[b], key=lambda c: _shape(tree, c))
    for x, y in zip(ca, cb):
        pairs += _match_subtrees(tree, x, y)
    return pairs


def _subtree(tree: WeightedTree, v: int) -> set[int]:
    out, stack = set(), [v]
    while stack:
        x = stack.pop()
        out.add(x)
        stack.extend(tree.children[x])
    return out


def permutation_probes(tree: WeightedTree, W: np.ndarray, sensors) -> list[tuple[str, np.ndarray]]:
    """Candidate weight vectors from swapping siblings.

    For every pair of siblings: swap the two parent edges; and when both
    subtrees are isomorphic and free of sensors, swap the whole weighted
    subtrees (which reproduces the output exactly).
    """
    sensors = set(sensors)
    probes = []
    for p in tree.nodes:
        for a, b in itertools.combinations(tree.children[p], 2):
            w = W.copy()
            ia, ib = tree.edge_index(p, a), tree.edge_index(p, b)
            w[ia], w[ib] = W[ib], W[ia]
            probes.append((f"swap edges {p}-{a} and {p}-{b}", w))
            if (_subtree(tree, a) | _subtree(tree, b)) & sensors:
                continue
            pairs = _match_subtrees(tree, a, b)
            if pairs is None or len(pairs) == 1:
                continue
            w = W.copy()
            par = tree.parent
            for x, y in pairs:
                ix, iy = tree.edge_index(x, par[x]), tree.edge_index(y, par[y])
                w[ix], w[iy] = W[iy], W[ix]
            probes.append((f"swap subtrees at {a} and {b}", w))
    return probes


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------

def search_counterexample(
    tree: WeightedTree,
    W,
    sensors: Iterable[int],
    *,
    attempts: int = 32,
    seed: int = 42,
    gap_tol: float = SEARCH_GAP_TOL,
    min_distance: float = MIN_DISTANCE,
    horizon: int | None = None,
    maxfev: int | None = None,
) -> Counterexample | None:
    """Look for ``W'`` at least ``min_distance`` away from ``W`` (sup norm) with
    the same Markov parameters up to ``gap_tol``.

    Sibling permutations are tried first, then ``attempts`` Nelder-Mead runs
    from seeded random starts on the squared Markov mismatch plus a penalty
    ``PENALTY * max(0, min_distance - |W' - W|_inf)``. Runs are sequential
    and the first success is returned, so results depend only on
    ``(seed, attempts)``. ``None`` means nothing was found, not that ``W``
    is identifiable.
    """
    if attempts < 1:
        raise ValueError("attempts must be >= 1")
    sensors = tuple(sorted(set(sensors)))
    W = as_weights(tree, W)
    m = 2 * tree.n if horizon is None else int(horizon)
    ref = markov_parameters(build_system(tree.with_weights(W), sensors), m).values

    def gap_of(w):
        q = markov_parameters(build_system(tree.with_weights(w), sensors), m).values
        return float(relative_gaps(q, ref).max())

    for label, w in permutation_probes(tree, W, sensors):
        dist = float(np.max(np.abs(w - W)))
        if dist < min_distance:
            continue
        g = gap_of(w)
        if g <= gap_tol:
            return Counterexample(w, g, dist, f"permutation ({label})")

    if not tree.edges:
        return None
    found = _optimize(tree, W, sensors, m, ref, attempts, seed, gap_tol, min_distance, maxfev)
    if found is None:
        return None
    w, g = found
    return Counterexample(w, g, float(np.max(np.abs(w - W))), "optimization")


def _optimize(tree, W, sensors, m, ref, attempts, seed, gap_tol, min_distance, maxfev):
    scale = np.maximum(np.max(np.abs(ref), axis=1, keepdims=True), 1e-300)
    eu, ev = tree.edge_arrays
    n, root = tree.n, tree.index(tree.root)
    si = np.array([tree.index(s) for s in sensors], dtype=np.int64)

    def mismatch(theta):
        w = np.exp(theta)
        q = _kernels.power_columns(eu, ev, w, n, root, m)[:, si]
        r = (q - ref) / scale
        return w, r

    def objective(theta):
        if np.any(np.abs(theta) > 50):
            return 1e30
        w, r = mismatch(theta)
        dist = np.max(np.abs(w - W))
        val = float(np.sum(r * r)) + PENALTY * max(0.0, min_distance - dist)
        return val if math.isfinite(val) else 1e30

    rng = np.random.default_rng(seed)
    lo, hi = np.log(W.min() / 3.0), np.log(W.max() * 3.0)
    dim = len(W)
    budget = maxfev or 400 * dim
    for _ in range(attempts):
        theta = rng.uniform(lo, hi, size=dim)
        for _restart in range(3):
            res = minimize(
                objective,
                theta,
                method="Nelder-Mead",
                options={"maxfev": budget, "xatol": 1e-13, "fatol": 1e-30, "adaptive": dim > 3},
            )
            if np.allclose(res.x, theta, rtol=0, atol=1e-14):
                break
            theta = res.x
        w, r = mismatch(theta)
        dist = float(np.max(np.abs(w - W)))
        if dist < min_distance:
            continue
        q = ref + r * scale
        g = float(relative_gaps(q, ref).max())
        if g <= gap_tol:
            return w, g
    return None


# ---------------------------------------------------------------------------
# star graphs
# ---------------------------------------------------------------------------

@dataclass
class StarAnalysis:
    n: int
    minimum: int
    witness: tuple[int, ...]
    # k -> subsets tried at that size and whether each admitted a counterexample
    history: dict[int, list[tuple[tuple[int, ...], bool]]] = field(default_factory=dict)


def analyze_star(
    n: int,
    W=None,
    *,
    seed: int = 42,
    attempts: int = 32,
    max_subsets: int = 10_000,
) -> StarAnalysis:
    """Smallest sensor count for which some subset of the star's nodes
    admits no counterexample.

    Subsets of each size are scanned in lexicographic order; the scan of a
    size stops at the first subset where the search comes back empty.
    """
    if n < 3:
        raise ValueError("star analysis needs n >= 3")
    W = np.arange(1.0, n) if W is None else np.asarray(W, dtype=float)
    tree = WeightedTree.star(W)
    out = StarAnalysis(n, -1, ())
    tried = 0
    for k in range(1, n + 1):
        out.history[k] = []
        for subset in itertools.combinations(tree.nodes, k):
            tried += 1
            if tried > max_subsets:
                raise RuntimeError(f"search budget of {max_subsets} subsets exceeded")
            cex = search_counterexample(tree, W, subset, attempts=attempts, seed=seed)
            out.history[k].append((subset, cex is not None))
            if cex is None:
                out.minimum = k
                out.witness = subset
                return out
    raise RuntimeError("every subset admits a counterexample")  # pragma: no cover


def star_minimum_analysis(n: int, W=None, seed: int = 42, **kwargs) -> int:
    """Minimum number of sensors identifying a star on ``n`` nodes (probed)."""
    return analyze_star(n, W, seed=seed, **kwargs).minimum


# ---------------------------------------------------------------------------
# two paths with one transfer function
# ---------------------------------------------------------------------------

FIG1_DEN = np.array([1.0, 12.0, 33.0, 18.0, 0.0])
FIG1_NUM = 4.5


@dataclass
class Figure1Report:
    weights: tuple[np.ndarray, np.ndarray]
    transfer: tuple[TransferFunction, TransferFunction]
    pair: DistinguishabilityReport
    distance: float
    checks: list[tuple[str, bool, str]]

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)


def figure1_weights() -> tuple[np.ndarray, np.ndarray]:
    """Weights ``(p, q, r)`` of a 4-node path and their reversal.

    For the sensor at the far end, ``2(p+q+r)``, ``3q(p+r) + 4pr`` and ``pqr``
    are the ``s^3``, ``s^2`` coefficients and the numerator; matching them to
    12, 33 and 4.5 with ``q = 2`` gives ``{p, r} = 2 +/- sqrt(7)/2``.
    """
    p, q, r = 2 + math.sqrt(7) / 2, 2.0, 2 - math.sqrt(7) / 2
    return np.array([p, q, r]), np.array([r, q, p])


def figure1_demo(tol: float = 1e-9) -> Figure1Report:
    w1, w2 = figure1_weights()
    tree = WeightedTree.path(w1)
    far = tree.nodes[-1]
    tfs = tuple(transfer_function(build_system(tree.with_weights(w), [far])) for w in (w1, w2))
    checks = []
    for label, tf in zip(("network 1", "network 2"), tfs):
        den_err = float(np.max(np.abs(tf.den - FIG1_DEN)))
        num = tf.num[0]
        num_err = float(max(np.max(np.abs(num[:-1])), abs(num[-1] - FIG1_NUM)))
        checks.append((f"{label} denominator s^4+12s^3+33s^2+18s", den_err <= tol, f"max err {den_err:.2e}"))
        checks.append((f"{label} numerator 4.5", num_err <= tol, f"max err {num_err:.2e}"))
    pair = indistinguishable(tree, w1, w2, [far], tol=tol)
    checks.append(("Markov sequences equal", pair.indistinguishable, f"gap {pair.max_markov_gap:.2e}"))
    dist = float(np.max(np.abs(w1 - w2)))
    checks.append(("weights differ (sup norm >= 2.6)", dist >= 2.6, f"{dist:.4f}"))
    return Figure1Report((w1, w2), tfs, pair, dist, checks)


def swap_weights(tree: WeightedTree, W, a: tuple[int, int], b: tuple[int, int]) -> np.ndarray:
    w = as_weights(tree, W).copy()
    ia, ib = tree.edge_index(*edge_key(*a)), tree.edge_index(*edge_key(*b))
    w[ia], w[ib] = w[ib], w[ia]
    return w
