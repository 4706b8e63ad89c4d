from __future__ import annotations

import itertools

import pytest

from rperm.algebra import Poly, var
from rperm.circuit import CircuitBuilder, circuit_eval_poly, parse_expr, weft
from rperm.errors import BudgetExceeded
from rperm.expsum import (SumSpec, exp_sum_bruteforce, indicator_weighted_to_full, split_reduction,
                          verify_split_identity, weighted_sum_bruteforce)
from rperm.randgen import random_circuit

from conftest import X

ys = [var("Y", i) for i in range(1, 7)]


def spec(text, ell, k=None):
    return SumSpec(parse_expr(text), ys[:ell], k)


def test_full_sums():
    assert exp_sum_bruteforce(spec("X1*(Y1 + Y2)", 2)) == 4 * X(1)
    assert exp_sum_bruteforce(spec("X1*X2 + 3", 2)) == 4 * (X(1) * X(2) + 3)
    assert exp_sum_bruteforce(spec("(1 - Y1)*(1 - Y2)*(1 - Y3)", 3)) == 1


def test_weighted_sums():
    assert weighted_sum_bruteforce(spec("Y1 + 2*Y2 + 3*Y3", 3, 1)) == 6
    s = spec("X1*Y1 + Y2 + 7", 2)
    assert weighted_sum_bruteforce(s, 0) == 7
    assert weighted_sum_bruteforce(s, 2) == X(1) + 8


def test_split_shapes():
    r = split_reduction(spec("Y1*Y2", 2), 2)
    assert r.b == 4 and r.k == 1
    r = split_reduction(spec("Y1*Y2*Y3*Y4", 4), 2)
    assert r.b == 8 and r.k == 2


def test_split_uneven_last_block():
    r = split_reduction(spec("Y1 + Y2 + Y3 + Y4 + Y5", 5), 2)
    assert [len(b) for b in r.blocks] == [2, 2, 1]
    assert r.b == 4 + 4 + 2 and r.k == 3


def test_good_assignment_bijection():
    r = split_reduction(spec("Y1 + Y2", 2), 2)
    seen = set()
    for bits in itertools.product((0, 1), repeat=2):
        y = dict(zip(ys[:2], bits))
        z = r.encode(y)
        assert sum(z.values()) == 1 and r.is_good(z)
        assert r.decode(z) == y
        seen.add(tuple(sorted(z.items())))
    assert len(seen) == 4


def test_split_identity_examples():
    for text, want in (("1 + 0*Y1", 4), ("Y1", 2), ("X1*Y1*Y2 + X2", X(1) + 4 * X(2))):
        s = spec(text, 2)
        res = verify_split_identity(s, split_reduction(s, 2))
        assert res["ok"] and res["lhs"] == want


def test_split_identity_random(rng):
    for _ in range(10):
        ell = rng.randint(1, 5)
        base = random_circuit(rng, [var("X", 1)] + ys[:ell], ell + 5)
        s = SumSpec(base, ys[:ell])
        for bs in (1, 2, 3):
            assert verify_split_identity(s, split_reduction(s, bs))["ok"]


def test_phi_on_good_points():
    s = spec("Y1*Y2 + Y3", 3)
    r = split_reduction(s, 2)
    for bits in itertools.product((0, 1), repeat=3):
        y = dict(zip(ys[:3], bits))
        z = r.encode(y)
        for v, img in r.phi.items():
            assert img.eval(z) == y[v]


def test_selector_weft():
    s = spec("Y1 + Y2 + Y3 + Y4 + Y5 + Y6", 6)
    r = split_reduction(s, 2)
    assert weft(r.p) == 2
    assert "SELECTOR" in r.dump()


def test_indicator_to_full():
    assert indicator_weighted_to_full(spec("Y1 + Y2", 2), 1) == 2
    assert indicator_weighted_to_full(spec("X1 + Y1", 2), 0) == X(1)


def test_indicator_to_full_random(rng):
    for _ in range(5):
        base = random_circuit(rng, ys[:3], 8)
        s = SumSpec(base, ys[:3])
        assert indicator_weighted_to_full(s, 2) == weighted_sum_bruteforce(s, 2)


def test_budget_and_validation():
    with pytest.raises(BudgetExceeded):
        exp_sum_bruteforce(spec("Y1", 6), budget=8)
    with pytest.raises(ValueError):
        SumSpec(parse_expr("Y1"), [ys[0], ys[0]])
    with pytest.raises(ValueError):
        split_reduction(spec("Y1", 1), 0)
