"""Rooted weighted trees: parsing, generations, sibling groups, path weights."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

Edge = tuple[int, int]


class TreeError(ValueError):
    """Invalid tree input (cycle, disconnected graph, bad weight, ...)."""


def edge_key(u: int, v: int) -> Edge:
    """Canonical key of the undirected edge ``u ~ v``."""
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class SiblingGroup:
    parent: int
    children: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class WeightedTree:
    """Immutable rooted tree with one positive weight per undirected edge.

    Nodes are arbitrary positive integer ids. Matrices built from the tree
    index nodes in ascending-id order (see :attr:`nodes` / :meth:`index`).
    Edges are stored as ``(min_id, max_id)`` tuples in sorted order and
    :attr:`weights` is aligned with :attr:`edges`.
    """

    root: int
    edges: tuple[Edge, ...]
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        _validate(self)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_edges(cls, root: int, weighted_edges: Iterable[tuple[int, int, float]]) -> "WeightedTree":
        """Build a tree from ``(u, v, weight)`` triples in any order."""
        table: dict[Edge, float] = {}
        for u, v, w in weighted_edges:
            u, v = int(u), int(v)
            if u == v:
                raise TreeError(f"self-loop at node {u}")
            key = edge_key(u, v)
            if key in table:
                raise TreeError(f"duplicate edge {key[0]}-{key[1]}")
            table[key] = float(w)
        keys = tuple(sorted(table))
        return cls(int(root), keys, np.array([table[k] for k in keys], dtype=float))

    @classmethod
    def star(cls, weights: Iterable[float], root: int = 1) -> "WeightedTree":
        """Star with center ``root`` and leaves ``root+1, root+2, ...``."""
        return cls.from_edges(root, [(root, root + 1 + i, w) for i, w in enumerate(weights)])

    @classmethod
    def path(cls, weights: Iterable[float], root: int = 1) -> "WeightedTree":
        """Path ``root, root+1, ...`` with weights listed from the root outward."""
        return cls.from_edges(root, [(root + i, root + i + 1, w) for i, w in enumerate(weights)])

    def with_weights(self, weights) -> "WeightedTree":
        """Same topology with a new weight vector (aligned with :attr:`edges`)
        or a mapping ``edge -> weight``."""
        if isinstance(weights, Mapping):
            weights = [weights[e] if e in weights else weights[e[::-1]] for e in self.edges]
        return WeightedTree(self.root, self.edges, np.asarray(weights, dtype=float))

    # -- structure ---------------------------------------------------------

    @cached_property
    def nodes(self) -> tuple[int, ...]:
        ids = {self.root}
        for u, v in self.edges:
            ids.update((u, v))
        return tuple(sorted(ids))

    @property
    def n(self) -> int:
        return len(self.nodes)

    @cached_property
    def _index(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    def index(self, node: int) -> int:
        """Row/column of ``node`` in matrices built from this tree."""
        try:
            return self._index[node]
        except KeyError:
            raise KeyError(f"node {node} is not in the tree") from None

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {v: [] for v in self.nodes}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return {v: tuple(sorted(nb)) for v, nb in adj.items()}

    @cached_property
    def _edge_pos(self) -> dict[Edge, int]:
        return {e: i for i, e in enumerate(self.edges)}

    def edge_index(self, u: int, v: int) -> int:
        return self._edge_pos[edge_key(u, v)]

    def weight(self, u: int, v: int) -> float:
        return float(self.weights[self.edge_index(u, v)])

    @cached_property
    def _bfs(self) -> tuple[dict[int, int | None], dict[int, int]]:
        parent: dict[int, int | None] = {self.root: None}
        depth = {self.root: 0}
        frontier = [self.root]
        while frontier:
            nxt = []
            for v in frontier:
                for c in self.adjacency[v]:
                    if c not in depth:
                        parent[c] = v
                        depth[c] = depth[v] + 1
                        nxt.append(c)
            frontier = nxt
        return parent, depth

    @property
    def parent(self) -> dict[int, int | None]:
        return self._bfs[0]

    @property
    def depth(self) -> dict[int, int]:
        return self._bfs[1]

    @cached_property
    def children(self) -> dict[int, tuple[int, ...]]:
        par = self.parent
        return {v: tuple(c for c in self.adjacency[v] if par.get(c) == v) for v in self.nodes}

    @property
    def height(self) -> int:
        """Largest distance from the root (``p``)."""
        return max(self.depth.values())

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge endpoints as index arrays, for the numeric kernels."""
        eu = np.array([self.index(u) for u, _ in self.edges], dtype=np.int64)
        ev = np.array([self.index(v) for _, v in self.edges], dtype=np.int64)
        return eu, ev

    def weight_map(self) -> dict[Edge, float]:
        return {e: float(w) for e, w in zip(self.edges, self.weights)}

    def __eq__(self, other):
        if not isinstance(other, WeightedTree):
            return NotImplemented
        return (
            self.root == other.root
            and self.edges == other.edges
            and np.array_equal(self.weights, other.weights)
        )

    def __hash__(self):
        return hash((self.root, self.edges, self.weights.tobytes()))

    def __repr__(self):
        return f"WeightedTree(root={self.root}, n={self.n}, edges={len(self.edges)})"


def _validate(tree: WeightedTree) -> None:
    if tree.root <= 0:
        raise TreeError(f"node ids must be positive integers, got root {tree.root}")
    if len(tree.weights) != len(tree.edges):
        raise TreeError(f"{len(tree.edges)} edges but {len(tree.weights)} weights")
    if len(set(tree.edges)) != len(tree.edges):
        raise TreeError("duplicate edge")
    for (u, v), w in zip(tree.edges, tree.weights):
        if u <= 0 or v <= 0:
            raise TreeError(f"node ids must be positive integers, got edge {u}-{v}")
        if u >= v:
            raise TreeError(f"edge {u}-{v} is not in canonical (min, max) order")
        if not (math.isfinite(w) and w > 0):
            raise TreeError(f"edge {u}-{v} has non-positive weight {w}")
    ids = set(tree.nodes)
    if tree.edges and tree.root not in {x for e in tree.edges for x in e}:
        raise TreeError(f"root {tree.root} is not an endpoint of any edge")
    # union-find detects the first cycle-closing edge
    rep = {v: v for v in ids}

    def find(x):
        while rep[x] != x:
            rep[x] = rep[rep[x]]
            x = rep[x]
        return x

    for u, v in tree.edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            raise TreeError(f"edge {u}-{v} closes a cycle")
        rep[ru] = rv
    if len(tree.edges) != len(ids) - 1:
        raise TreeError("graph is disconnected")


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

def parse_tree(text: str, *, weighted: bool = True) -> WeightedTree:
    """Parse the line-oriented tree format.

    ``# ...`` comments, one ``root <id>`` line, and ``edge <u> <v> <weight>``
    lines. Without a ``root`` line the root defaults to node 1. With
    ``weighted=False`` the weight token may be omitted (or given as ``?``);
    such edges get a placeholder weight of 1.0, which is enough for callers
    that only need the topology.
    """
    root = None
    root_line = 0
    triples = []
    seen: dict[Edge, int] = {}
    rep: dict[int, int] = {}

    def find(x):
        rep.setdefault(x, x)
        while rep[x] != x:
            rep[x] = rep[rep[x]]
            x = rep[x]
        return x
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "root":
                if len(tok) != 2:
                    raise TreeError("expected 'root <id>'")
                if root is not None:
                    raise TreeError("root given twice")
                root = _node_id(tok[1])
                root_line = lineno
            elif tok[0] == "edge":
                if len(tok) == 4:
                    w = 1.0 if (tok[3] == "?" and not weighted) else _weight(tok[3])
                elif len(tok) == 3 and not weighted:
                    w = 1.0
                else:
                    raise TreeError("expected 'edge <u> <v> <weight>'")
                u, v = _node_id(tok[1]), _node_id(tok[2])
                if u == v:
                    raise TreeError(f"self-loop at node {u}")
                key = edge_key(u, v)
                if key in seen:
                    raise TreeError(f"duplicate edge {u}-{v} (first on line {seen[key]})")
                seen[key] = lineno
                ru, rv = find(u), find(v)
                if ru == rv:
                    raise TreeError(f"edge {u}-{v} closes a cycle")
                rep[ru] = rv
                triples.append((u, v, w))
            else:
                raise TreeError(f"unknown directive {tok[0]!r}")
        except TreeError as exc:
            raise TreeError(f"line {lineno}: {exc}") from None
    if root is None:
        root = 1
    if not triples:
        return WeightedTree(root, (), np.zeros(0))
    if root not in rep:
        where = f"line {root_line}: " if root_line else ""
        raise TreeError(f"{where}root {root} is not an endpoint of any edge")
    return WeightedTree.from_edges(root, triples)


def _node_id(tok: str) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise TreeError(f"bad node id {tok!r}") from None
    if v <= 0:
        raise TreeError(f"node ids must be positive, got {v}")
    return v


def _weight(tok: str) -> float:
    try:
        w = float(tok)
    except ValueError:
        raise TreeError(f"bad weight {tok!r}") from None
    if not (math.isfinite(w) and w > 0):
        raise TreeError(f"non-positive weight {tok}")
    return w


def load_tree(path, *, weighted: bool = True) -> WeightedTree:
    return parse_tree(Path(path).read_text(encoding="utf-8"), weighted=weighted)


def format_tree(tree: WeightedTree) -> str:
    lines = [f"root {tree.root}"]
    lines += [f"edge {u} {v} {float(w)!r}" for (u, v), w in zip(tree.edges, tree.weights)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------

def generations(tree: WeightedTree) -> list[tuple[int, ...]]:
    """Nodes grouped by distance from the root: ``[S_0, S_1, ..., S_p]``."""
    levels: list[list[int]] = [[] for _ in range(tree.height + 1)]
    for v in tree.nodes:
        levels[tree.depth[v]].append(v)
    return [tuple(level) for level in levels]


def sibling_groups(tree: WeightedTree, level: int) -> list[SiblingGroup]:
    """Children of each node of ``S_{level-1}`` that has any, as sibling groups."""
    if not 1 <= level <= tree.height:
        raise ValueError(f"level must be in 1..{tree.height}, got {level}")
    parents = generations(tree)[level - 1]
    return [SiblingGroup(p, tree.children[p]) for p in parents if tree.children[p]]


def root_path(tree: WeightedTree, v: int) -> list[int]:
    """Nodes on the path from ``v`` up to the root, ``v`` first."""
    out = [v]
    while (p := tree.parent[out[-1]]) is not None:
        out.append(p)
    return out


def path_nodes(tree: WeightedTree, u: int, v: int) -> list[int]:
    up = root_path(tree, u)
    vp = root_path(tree, v)
    on_u = set(up)
    lca = next(x for x in vp if x in on_u)
    return up[: up.index(lca) + 1] + vp[: vp.index(lca)][::-1]


def path_weight(tree: WeightedTree, u: int, v: int) -> float:
    """Product of edge weights on the unique ``u``-``v`` path (1 when ``u == v``)."""
    p = path_nodes(tree, u, v)
    # sorted product keeps u->v and v->u bit-identical
    return math.prod(sorted(tree.weight(a, b) for a, b in zip(p, p[1:])))


def non_input_leaves(tree: WeightedTree) -> set[int]:
    """Degree-one nodes other than the root."""
    return {v for v, nb in tree.adjacency.items() if len(nb) == 1 and v != tree.root}


# ---------------------------------------------------------------------------
# random trees (tests, benchmarks, CLI experiments)
# ---------------------------------------------------------------------------

def random_tree(
    n: int,
    rng: np.random.Generator,
    weight_range: tuple[float, float] = (0.5, 2.0),
    *,
    kind: str = "mixed",
) -> WeightedTree:
    """Random tree on nodes ``1..n`` rooted at node 1.

    ``kind`` is ``"recursive"`` (each new node attaches to a uniform earlier
    node; shallow, bushy), ``"prufer"`` (uniform labelled tree; deeper) or
    ``"mixed"`` (coin flip between the two).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lo, hi = weight_range
    if kind == "mixed":
        kind = "recursive" if rng.random() < 0.5 else "prufer"
    if n == 1:
        return WeightedTree(1, (), np.zeros(0))
    if kind == "recursive":
        pairs = [(int(rng.integers(1, i)), i) for i in range(2, n + 1)]
    elif kind == "prufer":
        import networkx as nx

        if n == 2:
            pairs = [(1, 2)]
        else:
            seq = [int(x) for x in rng.integers(0, n, size=n - 2)]
            g = nx.from_prufer_sequence(seq)
            pairs = [(u + 1, v + 1) for u, v in g.edges()]
    else:
        raise ValueError(f"unknown kind {kind!r}")
    w = rng.uniform(lo, hi, size=len(pairs))
    return WeightedTree.from_edges(1, [(u, v, wi) for (u, v), wi in zip(pairs, w)])
