from __future__ import annotations

import random

import pytest

from rperm.algebra import Poly, var
from rperm.circuit import CircuitBuilder, circuit_eval_point, circuit_eval_poly, parse_expr
from rperm.errors import InvalidDecomposition, SizeBudgetExceeded, StateBudgetExceeded
from rperm.gadgets import build_instance, long_cycle_length, nice_partition, v2_decomposition
from rperm.graph import WeightedDigraph, complete_digraph, per_le_c, restricted_permanent
from rperm.randgen import random_ktree_digraph
from rperm.suite import nice_instances
from rperm.treedec import TreeDecomposition, make_nice
from rperm.twdp import (cyc_circuit, dp_per_le_c, expand_to_formula, expanded_size, height_envelope,
                        membership_polynomial, per_le_c_circuit, simple_cycles_of_length, verify_membership)

from conftest import X


def test_single_loop():
    g = WeightedDigraph(1)
    g.add_edge(0, 0, X(1))
    circ = dp_per_le_c(g, make_nice(TreeDecomposition({0: {0}}, [])), 1)
    assert circuit_eval_poly(circ) == X(1)


def test_two_node():
    g = WeightedDigraph(2)
    g.add_edge(0, 1, X(1))
    g.add_edge(1, 0, X(2))
    g.add_edge(0, 0, X(3))
    g.add_edge(1, 1, X(4))
    circ = dp_per_le_c(g, make_nice(TreeDecomposition({0: {0, 1}}, [])), 2)
    assert circuit_eval_poly(circ) == X(3) * X(4) + X(1) * X(2)
    assert circuit_eval_poly(circ) == per_le_c(g, 2)


def test_parallel_edges_and_loops():
    g = WeightedDigraph(2)
    g.add_edge(0, 1, X(1))
    g.add_edge(0, 1, X(2))
    g.add_edge(1, 0)
    g.add_edge(0, 0, X(3))
    g.add_edge(0, 0, 5)
    g.add_edge(1, 1)
    for c in (1, 2):
        assert circuit_eval_poly(per_le_c_circuit(g, c)) == per_le_c(g, c)


def test_random_eight_node(rng):
    for _ in range(15):
        rg = random_ktree_digraph(rng, 8, 3)
        nt = make_nice(rg.decomposition)
        for c in (2, 3, 4):
            assert circuit_eval_poly(dp_per_le_c(rg.graph, nt, c)) == per_le_c(rg.graph, c)


def test_numeric_weights(rng):
    for _ in range(10):
        rg = random_ktree_digraph(rng, 7, 2, symbolic=False)
        circ = dp_per_le_c(rg.graph, make_nice(rg.decomposition), 3)
        assert circuit_eval_point(circ, {}) == per_le_c(rg.graph, 3).constant_value()


def test_invalid_decomposition():
    g = complete_digraph(4)
    bad = make_nice(TreeDecomposition({0: {0, 1, 2}, 1: {1, 2, 3}}, [(0, 1)]))
    with pytest.raises(InvalidDecomposition):
        dp_per_le_c(g, bad, 2)


def test_state_budget():
    g = complete_digraph(6)
    with pytest.raises(StateBudgetExceeded):
        dp_per_le_c(g, make_nice(TreeDecomposition({0: set(range(6))}, [])), 4, budget=5)


def test_expand_tree_is_identity():
    f = parse_expr("(X1 + X2)*X3")
    e = expand_to_formula(f)
    assert e.to_text() == f.to_text()


def test_expand_diamond():
    cb = CircuitBuilder()
    s = cb.add(cb.var(var("X", 1)), cb.var(var("X", 2)))
    c = cb.build(cb.mul(s, s))
    e = expand_to_formula(c)
    assert e.is_formula() and e.size == expanded_size(c) == 7 > c.size
    assert circuit_eval_poly(e) == circuit_eval_poly(c)
    with pytest.raises(SizeBudgetExceeded):
        expand_to_formula(c, size_budget=3)


def test_expand_dp_circuit():
    rg = random_ktree_digraph(random.Random(8), 8, 2)
    nt = make_nice(rg.decomposition)
    circ = dp_per_le_c(rg.graph, nt, 3)
    f = expand_to_formula(circ)
    r = random.Random(3)
    for _ in range(5):
        pt = {v: r.randint(-3, 3) for v in circ.variables()}
        assert circuit_eval_point(f, pt) == circuit_eval_point(circ, pt)
    assert height_envelope(circ, nt.height) > 0


def triangle_plus_isolated():
    return nice_instances(random.Random(0), randoms=0)[0]


def test_membership_triangle():
    _, g, v1, v2, k, c, _, dec = triangle_plus_isolated()
    got = membership_polynomial(g, v1, v2, k, c, dec)
    assert got == restricted_permanent(g, k, c)
    assert got == X(1, 2) * X(2, 3) * X(3, 1) * X(4, 4)


def test_membership_modes_agree():
    _, g, v1, v2, k, c, _, dec = triangle_plus_isolated()
    assert membership_polynomial(g, v1, v2, k, c, dec, mode="subsets") == membership_polynomial(g, v1, v2, k, c, dec)


def test_membership_k_too_large():
    _, g, v1, v2, _, c, _, dec = triangle_plus_isolated()
    assert membership_polynomial(g, v1, v2, 9, c, dec).is_zero()


def test_membership_compiled_gadget():
    inst = build_instance(parse_expr("Y1*Y2"), [var("Y", 1), var("Y", 2)], 2)
    v1, v2 = nice_partition(inst.g3)
    k = long_cycle_length(inst.g3, 2)
    res = verify_membership(inst.g3.graph, v1, v2, k, 4, v2_decomposition(inst.g3))
    assert res["ok"] and not res["oracle"].is_zero()


def test_membership_random_nice(rng):
    for name, g, v1, v2, k, c, b, dec in nice_instances(rng, randoms=4)[1:-1]:
        assert verify_membership(g, v1, v2, k, c, dec)["ok"], name


def test_cyc_circuit_is_indicator():
    g = complete_digraph(3, loops=False)
    cyc = cyc_circuit(g, 3)
    cycles = {frozenset(c) for c in simple_cycles_of_length(g, 3)}
    import itertools
    ids = sorted(g.edges)
    for sel in itertools.combinations(ids, 3):
        pt = {var("E", i): int(i in sel) for i in ids}
        assert circuit_eval_point(cyc, pt) == int(frozenset(sel) in cycles)
