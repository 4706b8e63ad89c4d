from __future__ import annotations

import itertools
import math

import pytest

from rperm.algebra import Poly, var
from rperm.gadgets import build_instance, compile_G1, nice_partition, prepare_formula, v2_decomposition
from rperm.circuit import parse_expr
from rperm.errors import BudgetExceeded, ParseError
from rperm.graph import (LengthFilter, WeightedDigraph, build_Rn, complete_digraph, consistent_cover_sum,
                         cover_sum, enumerate_covers, matching_polynomial_bruteforce, matchings_via_22perm,
                         matrix_of, partition_from_text, partition_to_text, per_le_c, permanent_bruteforce,
                         restricted_permanent, telephone_number, validate_nice)
from rperm.randgen import random_ktree_digraph
from rperm.treedec import TreeDecomposition

from conftest import X


def cycle_graph(n):
    g = WeightedDigraph(n)
    for i in range(n):
        g.add_edge(i, (i + 1) % n)
    return g


def assert_degrees(g, cover):
    ins, outs = [0] * g.n, [0] * g.n
    for eid in cover.edge_ids:
        e = g.edges[eid]
        outs[e.src] += 1
        ins[e.dst] += 1
    assert ins == [1] * g.n and outs == [1] * g.n


def test_enumerate_examples():
    g = WeightedDigraph(1)
    g.add_edge(0, 0)
    assert len(enumerate_covers(g)) == 1
    k3 = complete_digraph(3)
    covers = enumerate_covers(k3)
    assert len(covers) == 6
    for cv in covers:
        assert_degrees(k3, cv)
    assert len(enumerate_covers(cycle_graph(2))) == 1


def test_permanent_examples():
    m = matrix_of(complete_digraph(2))
    assert permanent_bruteforce(m) == X(1, 1) * X(2, 2) + X(1, 2) * X(2, 1)
    ident = [[Poly.const(int(i == j)) for j in range(3)] for i in range(3)]
    assert permanent_bruteforce(ident) == 1
    ones = [[Poly.const(1)] * 4 for _ in range(4)]
    assert permanent_bruteforce(ones) == 24


def test_cover_sum_equals_permanent(rng):
    for _ in range(10):
        rg = random_ktree_digraph(rng, rng.randint(1, 6), 3)
        assert cover_sum(rg.graph) == permanent_bruteforce(matrix_of(rg.graph))


def test_restricted_examples():
    assert restricted_permanent(cycle_graph(3), 3, 1) == 1
    k3 = complete_digraph(3)
    want = Poly.const(0)
    for i, j in itertools.combinations(range(1, 4), 2):
        m = ({1, 2, 3} - {i, j}).pop()
        want = want + X(i, j) * X(j, i) * X(m, m)
    assert restricted_permanent(k3, 2, 1) == want


def test_per_le_c_examples():
    k2 = complete_digraph(2)
    assert per_le_c(k2, 2) == X(1, 1) * X(2, 2) + X(1, 2) * X(2, 1)
    assert per_le_c(k2, 1) == X(1, 1) * X(2, 2)


def test_per_le_c_filtered_oracle(rng):
    for _ in range(10):
        rg = random_ktree_digraph(rng, 4, 3, p_edge=.5)
        covers = enumerate_covers(rg.graph)
        want = sum((cv.weight(rg.graph) for cv in covers if max(cv.lengths()) <= 3), Poly.const(0))
        assert per_le_c(rg.graph, 3) == want


def test_restricted_two_paths(rng):
    for _ in range(15):
        rg = random_ktree_digraph(rng, rng.randint(3, 7), 3)
        for k, c in ((3, 2), (4, 2), (2, 2), (3, 3)):
            lf = LengthFilter(c=c, k=k)
            covers = enumerate_covers(rg.graph, lf)
            want = sum((cv.weight(rg.graph) for cv in covers), Poly.const(0))
            assert restricted_permanent(rg.graph, k, c) == want
            assert cover_sum(rg.graph, lf, reorder=False) == want


def test_k_le_c_counts_each_cover_once():
    # two 2-cycles: the cover with both counts once for k=2, c=2
    g = WeightedDigraph(4)
    g.add_edge(0, 1, X(1))
    g.add_edge(1, 0)
    g.add_edge(2, 3, X(2))
    g.add_edge(3, 2)
    assert restricted_permanent(g, 2, 2) == X(1) * X(2)
    assert restricted_permanent(g, 2, 1) == 0


def test_budget():
    with pytest.raises(BudgetExceeded):
        enumerate_covers(complete_digraph(5), budget=10)
    with pytest.raises(BudgetExceeded):
        per_le_c(complete_digraph(6), 6, budget=10)


def test_consistent_cover_sum():
    g = WeightedDigraph(4)
    a = g.add_edge(0, 1, X(1))
    g.add_edge(1, 0)
    g.add_edge(0, 0)
    g.add_edge(1, 1)
    b = g.add_edge(2, 3, X(2))
    g.add_edge(3, 2)
    g.add_edge(2, 2)
    g.add_edge(3, 3)
    assert consistent_cover_sum(g, []) == (1 + X(1)) * (1 + X(2))
    assert consistent_cover_sum(g, [(a, b)]) == 1 + X(1) * X(2)


def test_g1_cover_sum():
    g1 = compile_G1(prepare_formula(parse_expr("X1 + X2")))
    assert consistent_cover_sum(g1.graph, g1.couplings) == X(1) + X(2)


def test_build_Rn_shapes():
    r1 = build_Rn(1)
    assert r1.graph.n == 2 and len(r1.y_edges) == 1 and not r1.connecting
    assert sum(1 for e in r1.graph.edges.values() if e.is_loop) == 2
    assert len(build_Rn(2).connecting) == 2


def test_Rn_cycles_alternate():
    import networkx as nx
    for n in range(1, 5):
        rn = build_Rn(n)
        ys = {(rn.graph.edges[e].src, rn.graph.edges[e].dst) for e in rn.y_edges}
        for cyc in nx.simple_cycles(rn.graph.to_networkx()):
            if len(cyc) == 1:
                continue
            assert len(cyc) % 2 == 0
            pairs = list(zip(cyc, cyc[1:] + cyc[:1]))
            flags = [p in ys for p in pairs]
            assert all(flags[i] != flags[i + 1] for i in range(len(flags) - 1))


def test_Rn_directed_cycle_count():
    # cycles through a fixed k-set of y-edges: (k-1)! for k >= 2, none for k = 1
    from rperm.suite import rn_cover_counts
    for n in range(1, 5):
        for k in range(1, n + 1):
            want = math.factorial(k - 1) if k >= 2 else 0
            assert set(rn_cover_counts(n, k).values()) == {want}
    assert sum(rn_cover_counts(3, 2).values()) == 3


def test_Rn_extra_y_edges_need_second_long_cycle():
    for n in range(2, 5):
        rn = build_Rn(n)
        for k in (1, 2):
            for cv in enumerate_covers(rn.graph, LengthFilter(c=None, k=2 * k)):
                ys = sum(1 for e in rn.y_edges if e in cv.edge_ids)
                if ys > k:
                    assert sorted(cv.lengths())[-2] >= 4


def test_matchings():
    assert matchings_via_22perm(1) == 1
    assert matchings_via_22perm(2) == 1 + X(1, 2)
    assert matchings_via_22perm(3) == 1 + X(1, 2) + X(1, 3) + X(2, 3)
    for n in range(1, 7):
        p = matchings_via_22perm(n)
        assert p == matching_polynomial_bruteforce(n)
        assert len(p) == telephone_number(n)


def test_validate_nice_examples():
    g = WeightedDigraph(1)
    g.add_edge(0, 0)
    for c in range(1, 5):
        assert validate_nice(g, [0], [], c, 0).valid
    tri = WeightedDigraph(3)
    for i in range(3):
        tri.add_edge(i, (i + 1) % 3)
        tri.add_edge(i, i)
    rep = validate_nice(tri, [0, 1, 2], [], 4, 0)
    assert not rep.girth_ok and not rep.valid


def test_validate_nice_compiled():
    inst = build_instance(parse_expr("X1*Y1 + X2*Y2"), [var("Y", 1), var("Y", 2)], 2)
    v1, v2 = nice_partition(inst.g3)
    rep = validate_nice(inst.g3.graph, v1, v2, 4, 5, v2_decomposition(inst.g3))
    assert rep.valid, rep.problems
    assert rep.width <= 5


def test_validate_nice_missing_decomposition():
    g = WeightedDigraph(2)
    g.add_edge(0, 0)
    g.add_edge(1, 1)
    rep = validate_nice(g, [0], [1], 2, 1)
    assert not rep.valid


def test_graph_text_roundtrip(rng):
    rg = random_ktree_digraph(rng, 6, 2)
    back = WeightedDigraph.from_text(rg.graph.to_text())
    assert back.to_text() == rg.graph.to_text()
    assert per_le_c(back, 3) == per_le_c(rg.graph, 3)
    with pytest.raises(ParseError):
        WeightedDigraph.from_text("DIGRAPH 1 1\n0 0 5 1\n")


def test_partition_text():
    assert partition_from_text(partition_to_text([0, 2], [1])) == ([0, 2], [1])
