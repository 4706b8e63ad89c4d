from __future__ import annotations

import math

import pytest

from rperm.algebra import Poly, var
from rperm.circuit import circuit_eval_poly, parse_expr, parse_trees
from rperm.errors import NotLayered, YVariableMisplaced
from rperm.gadgets import (LOCAL_MODES, build_instance, compile_G1, compile_G2, compile_G3,
                           compile_G3_ordered, cyclic_order_count, g1_parse_tree_check,
                           iff_gadget_local_check, long_cycle_length, parse_fault, prepare_formula,
                           verify_hardness_identity)
from rperm.graph import LengthFilter, consistent_cover_sum, consistent_covers
from rperm.randgen import random_layered_formula
from rperm.twdp import simple_cycles_of_length

from conftest import X

Y1, Y2, Y3 = var("Y", 1), var("Y", 2), var("Y", 3)


def g1_of(text):
    return compile_G1(prepare_formula(parse_expr(text)))


def test_g1_sums():
    for text, want in (("X1 + X2", X(1) + X(2)), ("X1*X2", X(1) * X(2)),
                       ("(X1 + X2)*X3", X(1) * X(3) + X(2) * X(3))):
        g1 = g1_of(text)
        assert consistent_cover_sum(g1.graph, g1.couplings) == want


def test_g1_cover_count_matches_parse_trees():
    f = prepare_formula(parse_expr("(X1 + X2)*X3"))
    g1 = compile_G1(f)
    assert len(consistent_covers(g1.graph, g1.couplings)) == len(parse_trees(f)) == 2


def test_g1_rejects_unlayered():
    with pytest.raises(NotLayered):
        compile_G1(parse_expr("X1*X2"))


def test_g1_bijection_random(rng):
    for _ in range(15):
        f = random_layered_formula(rng, [var("X", 1), var("X", 2)], 12)
        res = g1_parse_tree_check(f)
        assert res["ok"] and res["covers"] == res["trees"] and res["max_cycle"] <= 2


def g2_sum(text, ys, k):
    f = prepare_formula(parse_expr(text))
    g2 = compile_G2(compile_G1(f), ys)
    return consistent_cover_sum(g2.graph, g2.couplings, LengthFilter(c=2, k=2 * k))


def test_g2_selects_y_sets():
    assert g2_sum("Y1*Y2", [Y1, Y2], 2) == 1
    assert g2_sum("X1*Y1 + X2*Y2", [Y1, Y2], 2) == X(1) + X(2)
    # X1 does not go through Y1, yet the e=(1,1) selection still covers it
    assert g2_sum("X1 + Y1", [Y1, Y2], 2) == 1 + X(1)


def test_g2_k1_is_degenerate():
    # R_1 has no connecting edge, so no long cycle can pick a single y-edge
    assert g2_sum("Y1", [Y1], 1) == 0


def test_g2_rejects_misplaced_y():
    g1 = g1_of("X1*Y1")
    eid = next(e.id for e in g1.graph.edge_list() if not e.is_loop)
    g1.graph.set_weight(eid, Poly.variable(Y1))
    with pytest.raises(YVariableMisplaced):
        compile_G2(g1, [Y1])
    with pytest.raises(YVariableMisplaced):
        compile_G2(g1_of("X1*Y2"), [Y1])


def test_g2_consistent_covers_short_cycles():
    f = prepare_formula(parse_expr("X1*Y1 + Y2"))
    g2 = compile_G2(compile_G1(f), [Y1, Y2])
    for cv in consistent_covers(g2.graph, g2.couplings, LengthFilter(c=2, k=4)):
        assert sorted(cv.lengths())[-2] <= 2


def test_local_table():
    rep = iff_gadget_local_check()
    assert rep.counts == {"both": 1, "neither": 6, "only_xy": 2, "only_uv": 2, "cross_xv": 2, "cross_uy": 2}
    assert rep.totals == {"both": 2, "neither": 2, "only_xy": 0, "only_uv": 0, "cross_xv": 0, "cross_uy": 0}
    assert rep.total_covers == 15 and rep.ok


@pytest.mark.parametrize("fault", ["ay", "cloop"])
def test_local_table_faults(fault):
    assert not iff_gadget_local_check(fault).ok


def test_parse_fault():
    assert parse_fault("ay:2") == ("ay", 2)
    assert parse_fault(None) is None
    with pytest.raises(ValueError):
        parse_fault("zz:0")


def test_g3_structure():
    inst = build_instance(parse_expr("X1*Y1 + X2*Y2"), [Y1, Y2], 2)
    assert not inst.g3.check()
    assert inst.g3.M == len(inst.g2.couplings)
    weights = sorted(e.weight.constant_value() for e in inst.g3.graph.edge_list() if e.weight.is_constant())
    assert weights.count(-2) == inst.g3.M


def hardness(text, n, k, ordered=False, fault=None):
    ys = [var("Y", i) for i in range(1, n + 1)]
    return verify_hardness_identity(build_instance(parse_expr(text), ys, k, ordered, fault))


def test_rhs_examples():
    r = hardness("X1*Y1 + X2*Y2", 2, 1)
    assert r.weighted_sum == X(1) + X(2)
    assert r.rhs == (X(1) + X(2)) * 2 ** r.M
    r = hardness("Y1*Y2", 2, 2)
    assert r.rhs == 2 * 2 ** r.M


def test_cycle_count_identity():
    # the left side equals (number of directed k-cycles) * 2^M * weighted sum
    for text, n in (("Y1*Y2", 2), ("X1*Y1 + X2*Y2", 2), ("X1*Y1 + Y2*Y3", 3)):
        r = hardness(text, n, 2)
        assert r.holds_cyclic and not r.lhs.is_zero()


def test_cycle_count_identity_k3():
    r = hardness("X1*Y1 + Y2*Y3", 3, 3)
    assert r.cyclic_factor == math.factorial(2)
    assert r.holds_cyclic
    assert r.lhs == 2 * 2 ** r.M * (1 + X(1))


def test_ordered_examples():
    r = hardness("Y1*Y2", 2, 2, ordered=True)
    assert r.holds and r.lhs == 2 ** r.M


def test_ordered_one_cycle_per_pair():
    inst = build_instance(parse_expr("Y1 + Y3"), [Y1, Y2, Y3], 2, ordered=True)
    g3 = inst.g3
    ye = [g3.y_edge_map[y] for y in (Y1, Y2, Y3)]
    through = [c for c in simple_cycles_of_length(g3.graph, long_cycle_length(g3, 2))
               if ye[0] in c and ye[2] in c]
    assert len(through) == 1


def test_ordered_k1_matches_plain():
    a = hardness("Y1", 1, 1)
    b = hardness("Y1", 1, 1, ordered=True)
    assert a.lhs == b.lhs and a.rhs == b.rhs


def test_k1_degenerate():
    # no long cycle through a single y-edge; 3 <= 4 so the "long" cycle is not unique either
    r = hardness("Y1", 1, 1)
    assert r.lhs.is_zero() and not r.rhs.is_zero()
    assert cyclic_order_count(1, False) == 0


def test_faults_break_identity():
    for fault in ("ay:0", "cloop:0"):
        for ordered in (False, True):
            r = hardness("Y1*Y2", 2, 2, ordered, fault)
            assert not r.holds and not r.holds_cyclic


def test_provenance_covers_everything():
    inst = build_instance(parse_expr("X1*Y1"), [Y1, Y2], 2)
    g = inst.g3
    for v in range(g.graph.n):
        assert ("node", v) in g.provenance
    for eid in g.graph.edges:
        assert ("edge", eid) in g.provenance
    assert g.provenance_text()


def test_ordered_compiles_longer_cycle():
    g2 = compile_G2(g1_of("Y1*Y2"), [Y1, Y2])
    assert long_cycle_length(compile_G3(g2), 2) == 6
    assert long_cycle_length(compile_G3_ordered(g2), 2) == 7


def test_lhs_matches_cover_listing():
    from rperm.graph import enumerate_covers
    inst = build_instance(parse_expr("Y1*Y2"), [Y1, Y2], 2)
    r = verify_hardness_identity(inst)
    covers = enumerate_covers(inst.g3.graph, LengthFilter(c=4, k=r.cycle_length))
    assert sum((cv.weight(inst.g3.graph) for cv in covers), Poly.const(0)) == r.lhs
