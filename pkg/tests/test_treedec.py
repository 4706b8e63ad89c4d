from __future__ import annotations

import itertools

import networkx as nx
import pytest

from rperm.errors import InvalidDecomposition, ParseError
from rperm.graph import WeightedDigraph, complete_digraph
from rperm.randgen import random_ktree_digraph
from rperm.treedec import (FORGET, INTRODUCE, JOIN, LEAF, TreeDecomposition, elimination_width,
                           heuristic_decomposition, make_nice, naive_treewidth, validate_decomposition)


def path_graph(n):
    g = WeightedDigraph(n)
    for i in range(n - 1):
        g.add_edge(i, i + 1)
    return g


def path_td(n):
    return TreeDecomposition({i: {i, i + 1} for i in range(n - 1)}, [(i, i + 1) for i in range(n - 2)])


def test_single_bag_valid():
    g = complete_digraph(5)
    rep = validate_decomposition(g, TreeDecomposition({0: set(range(5))}, []))
    assert rep.valid and rep.width == 4


def test_path_valid():
    rep = validate_decomposition(path_graph(5), path_td(5))
    assert rep.valid and rep.width == 1


def test_missing_edge_flagged():
    g = complete_digraph(4)
    rep = validate_decomposition(g, TreeDecomposition({0: {0, 1, 2}, 1: {1, 2, 3}}, [(0, 1)]))
    assert not rep.covers_edges and not rep.valid


def test_disconnected_occurrence_flagged():
    g = path_graph(3)
    td = TreeDecomposition({0: {0, 1}, 1: {1, 2}, 2: {0}}, [(0, 1), (1, 2)])
    rep = validate_decomposition(g, td)
    assert not rep.connected


def test_make_nice_single_bag():
    nt = make_nice(TreeDecomposition({0: {0, 1, 2}}, []))
    kinds = [nd.kind for nd in nt.nodes]
    assert kinds[0] == LEAF and kinds.count(INTRODUCE) == 3 and kinds.count(FORGET) == 3
    assert not nt.check()


def test_make_nice_path():
    nt = make_nice(path_td(6))
    assert nt.width == 1 and not nt.check()
    assert validate_decomposition(path_graph(6), nt.as_decomposition()).valid


def test_make_nice_random(rng):
    for _ in range(20):
        rg = random_ktree_digraph(rng, 6, rng.randint(1, 3))
        nt = make_nice(rg.decomposition)
        assert nt.width == rg.decomposition.width
        assert not nt.check()
        assert validate_decomposition(rg.graph, nt.as_decomposition()).valid


def test_make_nice_rejects_non_tree():
    with pytest.raises(InvalidDecomposition):
        make_nice(TreeDecomposition({0: {0}, 1: {1}, 2: {2}}, [(0, 1), (1, 2), (2, 0)]))


def test_naive_treewidth_examples():
    tree = WeightedDigraph(6)
    for a, b in [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5)]:
        tree.add_edge(a, b)
    assert naive_treewidth(tree)[0] == 1
    width, td = naive_treewidth(complete_digraph(4))
    assert width == 3 and validate_decomposition(complete_digraph(4), td).valid


def test_naive_treewidth_against_all_orders(rng):
    for _ in range(8):
        g = WeightedDigraph(6)
        for a, b in itertools.combinations(range(6), 2):
            if rng.random() < 0.45:
                g.add_edge(a, b)
        best = min(elimination_width(g, order) for order in itertools.permutations(range(6)))
        width, td = naive_treewidth(g)
        assert width == best
        assert validate_decomposition(g, td).valid and td.width == width


def test_heuristic_decomposition_valid(rng):
    for _ in range(10):
        rg = random_ktree_digraph(rng, 8, 2)
        td = heuristic_decomposition(rg.graph)
        assert validate_decomposition(rg.graph, td).valid
        assert td.width >= naive_treewidth(rg.graph)[0]


def test_text_roundtrip(rng):
    rg = random_ktree_digraph(rng, 7, 2)
    td = rg.decomposition
    assert TreeDecomposition.from_text(td.to_text()).to_text() == td.to_text()
    with pytest.raises(ParseError):
        TreeDecomposition.from_text("BAG 0: 1")


def test_networkx_input():
    u = nx.cycle_graph(5)
    assert naive_treewidth(u)[0] == 2
