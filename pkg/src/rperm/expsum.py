"""Boolean sums of circuits and the block-splitting reduction to weight-k sums.

The reduction splits the summation variables into blocks E_1..E_k and adds
one variable Z_i^S per subset S of E_i.  Substituting

    Y_j  ->  prod_{S subset of E_i, Y_j not in S} (1 - Z_i^S)      (Y_j in E_i)

and multiplying by the selector p(Z) = prod_i sum_S Z_i^S turns a full sum
over {0,1}^l into a sum over Z-assignments with exactly k ones.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .algebra import Poly, Var, var
from .circuit import (ADD, CONST, MUL, VAR, Circuit, CircuitBuilder, circuit_eval_point,
                      circuit_eval_poly, weft)
from .classics import indicator_Bnk
from .errors import BudgetExceeded

DEFAULT_SUM_BUDGET = 1 << 20


@dataclass
class SumSpec:
    base: Circuit
    sum_vars: list
    k: int | None = None

    def __post_init__(self):
        self.sum_vars = list(self.sum_vars)
        if len(set(self.sum_vars)) != len(self.sum_vars):
            raise ValueError("summation variables repeat")
        if self.k is not None and not 0 <= self.k <= len(self.sum_vars):
            raise ValueError("k outside 0..l")

    @property
    def ell(self) -> int:
        return len(self.sum_vars)

    def poly(self) -> Poly:
        return circuit_eval_poly(self.base)

    def with_k(self, k: int | None) -> "SumSpec":
        return SumSpec(self.base, self.sum_vars, k)


def _sum_points(p: Poly, sum_vars: list, points) -> Poly:
    total = Poly.const(0)
    for point in points:
        total = total + p.partial_eval(dict(zip(sum_vars, point)))
    return total


def exp_sum_bruteforce(s: SumSpec, budget: int = DEFAULT_SUM_BUDGET) -> Poly:
    if (1 << s.ell) > budget:
        raise BudgetExceeded(f"2^{s.ell} points exceed budget {budget}")
    return _sum_points(s.poly(), s.sum_vars, itertools.product((0, 1), repeat=s.ell))


def weight_k_points(ell: int, k: int):
    for ones in itertools.combinations(range(ell), k):
        point = [0] * ell
        for i in ones:
            point[i] = 1
        yield tuple(point)


def weighted_sum_bruteforce(s: SumSpec, k: int | None = None, budget: int = DEFAULT_SUM_BUDGET) -> Poly:
    k = s.k if k is None else k
    if k is None:
        raise ValueError("no weight given")
    if math.comb(s.ell, k) > budget:
        raise BudgetExceeded(f"C({s.ell},{k}) points exceed budget {budget}")
    return _sum_points(s.poly(), s.sum_vars, weight_k_points(s.ell, k))


@dataclass
class SplitReduction:
    blocks: list
    z_vars: list
    phi: dict          # Y var -> Poly image
    G: Circuit         # p * g~
    p: Circuit
    g_tilde: Circuit
    k: int = field(init=False)

    def __post_init__(self):
        self.k = len(self.blocks)

    @property
    def b(self) -> int:
        return len(self.z_vars)

    def encode(self, y: dict) -> dict:
        """Good Z-assignment for a 0/1 assignment of the summation variables."""
        z = {zv: 0 for zv in self.z_vars}
        for i, block in enumerate(self.blocks):
            mask = sum(1 << pos for pos, v in enumerate(block) if y[v])
            z[var("Z", i, mask)] = 1
        return z

    def decode(self, z: dict) -> dict:
        y = {}
        for i, block in enumerate(self.blocks):
            chosen = [zv for zv in self.z_vars if zv.idx[0] == i and z.get(zv, 0)]
            if len(chosen) != 1:
                raise ValueError(f"block {i} has {len(chosen)} selected subsets")
            mask = chosen[0].idx[1]
            for pos, v in enumerate(block):
                y[v] = (mask >> pos) & 1
        return y

    def is_good(self, z: dict) -> bool:
        return all(sum(z.get(zv, 0) for zv in self.z_vars if zv.idx[0] == i) == 1
                   for i in range(len(self.blocks)))

    def dump(self) -> str:
        lines = [f"SPLIT blocks={len(self.blocks)} b={self.b}"]
        for v, img in self.phi.items():
            lines.append(f"PHI {v}")
            lines.append(img.to_text().rstrip())
        lines.append("SELECTOR")
        lines.append(circuit_eval_poly(self.p).to_text().rstrip())
        return "\n".join(lines) + "\n"


def split_reduction(s: SumSpec, block_size: int) -> SplitReduction:
    if block_size < 1:
        raise ValueError("block_size must be at least 1")
    blocks = [s.sum_vars[i:i + block_size] for i in range(0, s.ell, block_size)]
    z_vars = [var("Z", i, mask) for i, block in enumerate(blocks) for mask in range(1 << len(block))]

    cb = CircuitBuilder()
    one, minus = cb.const(1), cb.const(-1)
    image: dict = {}
    phi: dict = {}
    for i, block in enumerate(blocks):
        for pos, v in enumerate(block):
            masks = [m for m in range(1 << len(block)) if not (m >> pos) & 1]
            factors = [cb.add(one, cb.mul(minus, cb.var(var("Z", i, m)))) for m in masks]
            image[v] = factors[0] if len(factors) == 1 else cb.mul(*factors)
            img = Poly.const(1)
            for m in masks:
                img = img * (1 - Poly.variable(var("Z", i, m)))
            phi[v] = img
    # g~: copy of the base circuit with summation variables replaced by their images
    gmap: dict = {}
    for g in s.base.gates:
        if g.kind == VAR:
            gmap[g.id] = image[g.var] if g.var in image else cb.var(g.var)
        elif g.kind == CONST:
            gmap[g.id] = cb.const(g.value)
        elif g.kind == ADD:
            gmap[g.id] = cb.add(*(gmap[ch] for ch in g.children))
        else:
            gmap[g.id] = cb.mul(*(gmap[ch] for ch in g.children))
    gt = gmap[s.base.output]
    sums = [cb.add(*(cb.var(var("Z", i, m)) for m in range(1 << len(block))))
            for i, block in enumerate(blocks)]
    pg = sums[0] if len(sums) == 1 else cb.mul(*sums)
    G = cb.build(cb.mul(pg, gt))
    p_circ = cb.build(pg)
    g_tilde = cb.build(gt)
    return SplitReduction(blocks, z_vars, phi, G, p_circ, g_tilde)


def verify_split_identity(s: SumSpec, r: SplitReduction, budget: int = DEFAULT_SUM_BUDGET) -> dict:
    """Full Boolean sum of g against the weight-k sum of G over the Z variables."""
    lhs = exp_sum_bruteforce(s, budget)
    if math.comb(r.b, r.k) > budget:
        raise BudgetExceeded(f"C({r.b},{r.k}) points exceed budget {budget}")
    rhs = Poly.const(0)
    for point in weight_k_points(r.b, r.k):
        rhs = rhs + circuit_eval_poly(r.G, subst=dict(zip(r.z_vars, point)))
    return {"ok": lhs == rhs, "lhs": lhs, "rhs": rhs, "b": r.b, "k": r.k,
            "weft_g": weft(s.base), "weft_G": weft(r.G)}


def indicator_weighted_to_full(s: SumSpec, k: int | None = None, budget: int = DEFAULT_SUM_BUDGET) -> Poly:
    """Weight-k sum rewritten as a full sum of g * B_{l,k}; both sides are checked."""
    k = s.k if k is None else k
    if (1 << s.ell) > budget:
        raise BudgetExceeded(f"2^{s.ell} points exceed budget {budget}")
    ind = indicator_Bnk(s.ell, k, ns="B")
    bvars = [var("B", i) for i in range(1, s.ell + 1)]
    p = s.poly()
    full = Poly.const(0)
    for point in itertools.product((0, 1), repeat=s.ell):
        weight = circuit_eval_point(ind, dict(zip(bvars, point)))
        if weight:
            full = full + p.partial_eval(dict(zip(s.sum_vars, point))) * weight
    direct = weighted_sum_bruteforce(s, k, budget)
    if full != direct:
        raise AssertionError(f"indicator sum {full} differs from weighted sum {direct}")
    return full
