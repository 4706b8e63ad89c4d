"""Seeded generators for formulas, circuits and bounded-treewidth digraphs.

Every generator takes a ``random.Random`` so one seed replays a whole run.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .algebra import Poly, var
from .circuit import BoolBuilder, BoolCircuit, Circuit, CircuitBuilder, Formula, layer_formula
from .graph import WeightedDigraph
from .treedec import TreeDecomposition


def random_expr_formula(rng: random.Random, leaves: list, max_depth: int = 3,
                        p_leaf: float = 0.35, max_fanin: int = 3, consts=(1, -1, 2)) -> Formula:
    """Random formula tree over ``leaves`` (Vars) with occasional small constants."""
    cb = CircuitBuilder()

    def gen(depth: int) -> int:
        if depth == 0 or rng.random() < p_leaf:
            if consts and rng.random() < 0.1:
                return cb.const(rng.choice(consts), shared=False)
            return cb.var(rng.choice(leaves), shared=False)
        kids = [gen(depth - 1) for _ in range(rng.randint(2, max_fanin))]
        return cb.add(*kids) if rng.random() < 0.5 else cb.mul(*kids)

    return cb.build(gen(max_depth), cls=Formula)


def random_layered_formula(rng: random.Random, leaves: list, max_gates: int, **kw) -> Formula:
    """Layered formula with at most ``max_gates`` gates (rejection sampling)."""
    for _ in range(10_000):
        f = layer_formula(random_expr_formula(rng, leaves, **kw))
        if f.size <= max_gates:
            return f
    raise RuntimeError("could not sample a small enough layered formula")


def random_circuit(rng: random.Random, variables: list, n_gates: int, consts=(1, -1, 2, 3)) -> Circuit:
    """Random DAG: leaves first, then Add/Mul gates over earlier gates; output is the last gate."""
    cb = CircuitBuilder()
    pool = [cb.var(v) for v in variables]
    if rng.random() < 0.5:
        pool.append(cb.const(rng.choice(consts)))
    ops = 0
    while ops == 0 or len(cb.gates) < n_gates:
        ops += 1
        kids = rng.sample(pool, min(len(pool), rng.randint(2, 3)))
        pool.append(cb.add(*kids) if rng.random() < 0.5 else cb.mul(*kids))
    return cb.build(pool[-1])


def random_bool_circuit(rng: random.Random, variables: list, n_gates: int) -> BoolCircuit:
    bb = BoolBuilder()
    pool = [bb.var(v) for v in variables]
    for _ in range(n_gates):
        r = rng.random()
        if r < 0.2:
            pool.append(bb.not_(rng.choice(pool)))
        else:
            kids = rng.sample(pool, min(len(pool), rng.randint(2, 3)))
            pool.append(bb.and_(*kids) if r < 0.6 else bb.or_(*kids))
    return bb.build(pool[-1])


@dataclass
class RandomGraph:
    graph: WeightedDigraph
    decomposition: TreeDecomposition
    width: int


def random_ktree_digraph(rng: random.Random, n: int, width: int, p_edge: float = 0.6,
                         p_both: float = 0.4, p_loop: float = 0.7, symbolic: bool = True) -> RandomGraph:
    """Random digraph inside a random partial k-tree, with the k-tree's decomposition.

    Weights are distinct variables ``X_{i,j}`` (1-based) when ``symbolic``,
    otherwise small nonzero integers.
    """
    width = max(0, min(width, n - 1))
    bags: dict = {}
    tree_edges = []
    und = set()
    base = list(range(min(n, width + 1)))
    bags[0] = frozenset(base)
    for i in base:
        for j in base:
            if i < j:
                und.add((i, j))
    cliques = [(0, base)]
    for v in range(len(base), n):
        parent, clique = rng.choice(cliques)
        keep = rng.sample(clique, width) if len(clique) > width else list(clique)
        bid = len(bags)
        bags[bid] = frozenset(keep + [v])
        tree_edges.append((parent, bid))
        for u in keep:
            und.add((min(u, v), max(u, v)))
        cliques.append((bid, keep + [v]))
    g = WeightedDigraph(n)

    def weight(i, j):
        if symbolic:
            return Poly.variable(var("X", i + 1, j + 1))
        return rng.choice([-2, -1, 1, 2, 3])

    for i, j in sorted(und):
        if rng.random() >= p_edge:
            continue
        r = rng.random()
        if r < p_both:
            g.add_edge(i, j, weight(i, j))
            g.add_edge(j, i, weight(j, i))
        elif r < (1 + p_both) / 2:
            g.add_edge(i, j, weight(i, j))
        else:
            g.add_edge(j, i, weight(j, i))
    for v in range(n):
        if rng.random() < p_loop:
            g.add_edge(v, v, weight(v, v))
    if n == 0:
        bags = {0: frozenset()}
    return RandomGraph(g, TreeDecomposition(bags, tree_edges), width)
