import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treeid.tree import (
    TreeError,
    WeightedTree,
    format_tree,
    generations,
    load_tree,
    non_input_leaves,
    parse_tree,
    path_nodes,
    path_weight,
    random_tree,
    sibling_groups,
)


def test_parse_smallest_tree():
    tree = parse_tree("root 1\nedge 1 2 0.5\n")
    assert tree.n == 2
    assert tree.weight(1, 2) == 0.5
    assert tree.weight(2, 1) == 0.5


def test_parse_t1_file(data_dir, t1):
    tree = load_tree(data_dir / "t1.tree")
    assert tree == t1
    assert generations(tree) == [(1,), (2,), (3, 5), (4, 6)]


def test_parse_comments_and_order_irrelevant():
    a = parse_tree("# c\nroot 1\nedge 2 3 1.5  # trailing\nedge 1 2 2\n")
    b = parse_tree("edge 1 2 2\nedge 3 2 1.5\n")
    assert a == b
    assert b.root == 1


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("root 1\nedge 1 2 1\nedge 2 3 1\nedge 3 1 1\n", "cycle"),
        ("root 1\nedge 1 2 1\nedge 3 4 1\n", "disconnected"),
        ("root 1\nedge 1 2 0\n", "non-positive"),
        ("root 1\nedge 1 2 -1\n", "non-positive"),
        ("root 1\nedge 1 2 1\nedge 2 1 3\n", "duplicate"),
        ("root 7\nedge 1 2 1\n", "root 7"),
        ("root 1\nedge 1 1 1\n", "self-loop"),
        ("root 1\nnode 3\n", "unknown directive"),
        ("root 1\nedge 1 x 1\n", "bad node id"),
        ("root 1\nedge 1 2 nan\n", "non-positive"),
    ],
)
def test_parse_errors(text, fragment):
    with pytest.raises(TreeError, match=fragment):
        parse_tree(text)


def test_disconnected_is_rejected():
    # four nodes, two edges, no cycle
    with pytest.raises(TreeError):
        parse_tree("root 1\nedge 1 2 1\nedge 3 4 1\n")


def test_parse_error_reports_line_number():
    with pytest.raises(TreeError, match="line 3"):
        parse_tree("root 1\nedge 1 2 1\nedge 2 3 zero\n")


def test_topology_only_parse():
    tree = parse_tree("root 1\nedge 1 2\nedge 2 3 ?\n", weighted=False)
    assert tree.edges == ((1, 2), (2, 3))
    with pytest.raises(TreeError):
        parse_tree("root 1\nedge 1 2\n")


def test_format_round_trip(t1):
    assert parse_tree(format_tree(t1)) == t1
    assert "edge 1 2 2.0" in format_tree(t1)


def test_single_node():
    tree = parse_tree("root 3\n")
    assert tree.nodes == (3,)
    assert generations(tree) == [(3,)]
    assert non_input_leaves(tree) == set()


def test_path_generations():
    tree = WeightedTree.path([1, 2, 3, 4])
    assert generations(tree) == [(1,), (2,), (3,), (4,), (5,)]


def test_sibling_groups_t1(t1):
    assert [(g.parent, g.children) for g in sibling_groups(t1, 3)] == [(5, (4, 6))]
    assert [(g.parent, g.children) for g in sibling_groups(t1, 1)] == [(1, (2,))]
    assert [(g.parent, g.children) for g in sibling_groups(t1, 2)] == [(2, (3, 5))]
    with pytest.raises(ValueError):
        sibling_groups(t1, 4)


def test_sibling_groups_star(star3):
    groups = sibling_groups(star3, 1)
    assert len(groups) == 1 and groups[0].children == (2, 3, 4)


def test_path_weight_examples(t1):
    assert path_weight(t1, 1, 4) == 30.0
    assert path_weight(t1, 4, 1) == 30.0
    assert path_weight(t1, 5, 4) == 5.0
    assert path_weight(t1, 3, 3) == 1.0
    assert path_nodes(t1, 3, 6) == [3, 2, 5, 6]


def test_non_input_leaves(t1, star3):
    assert non_input_leaves(t1) == {3, 4, 6}
    assert non_input_leaves(parse_tree("edge 1 2 1")) == {2}
    assert non_input_leaves(star3) == {2, 3, 4}


def test_non_contiguous_ids():
    tree = parse_tree("root 10\nedge 10 42 1\nedge 42 7 2\n")
    assert tree.nodes == (7, 10, 42)
    assert tree.index(10) == 1
    assert generations(tree) == [(10,), (42,), (7,)]


def test_weights_read_only(t1):
    with pytest.raises(ValueError):
        t1.weights[0] = 3.0


def test_with_weights_mapping(t1):
    t2 = t1.with_weights({(1, 2): 7.0, (2, 3): 1, (2, 5): 1, (4, 5): 1, (5, 6): 1})
    assert t2.weight(2, 1) == 7.0
    assert t2.edges == t1.edges


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 50), seed=st.integers(0, 2**32 - 1), kind=st.sampled_from(["recursive", "prufer"]))
def test_random_tree_structure(n, seed, kind):
    tree = random_tree(n, np.random.default_rng(seed), kind=kind)
    levels = generations(tree)
    assert sum(len(s) for s in levels) == n
    for i, level in enumerate(levels[1:], start=1):
        for v in level:
            assert tree.parent[v] in levels[i - 1]
        parents_with_children = [q for q in levels[i - 1] if tree.children[q]]
        assert len(sibling_groups(tree, i)) == len(parents_with_children)
        assert sorted(c for g in sibling_groups(tree, i) for c in g.children) == sorted(level)
    deg1 = sum(1 for v in tree.nodes if len(tree.adjacency[v]) == 1)
    root_leaf = 1 if len(tree.adjacency[tree.root]) == 1 else 0
    assert len(non_input_leaves(tree)) == deg1 - root_leaf


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 30), seed=st.integers(0, 2**32 - 1))
def test_path_weight_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    tree = random_tree(n, rng, weight_range=(0.1, 10.0))
    u, v = (int(x) for x in rng.integers(1, n + 1, size=2))
    assert path_weight(tree, u, v) == path_weight(tree, v, u)
