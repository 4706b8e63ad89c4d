"""Circuits for short-cycle cover sums over a nice tree decomposition.

The DP state at a decomposition node is a sorted tuple of open paths
``(start, end, length)`` between bag vertices.  A bag vertex that is not an
endpoint is already settled (in- and out-edge chosen); a length-0 path
``(v, v, 0)`` is a vertex that has no chosen edge yet.  Completed cycles are
folded into the value and leave no trace in the state.

Every edge is decided exactly once: when the first of its endpoints is
forgotten (self-loops when their vertex is forgotten).  At that point the
other endpoint is still in the bag, and since each edge belongs to a single
forget node, the two sides of a join never share an edge.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .algebra import Poly, var
from .circuit import (BoolBuilder, Circuit, CircuitBuilder, Formula, VAR, CONST, ADD,
                      arithmetize, circuit_eval_point, circuit_eval_poly)
from .errors import BudgetExceeded, InvalidDecomposition, SizeBudgetExceeded, StateBudgetExceeded
from .graph import WeightedDigraph, _cycles_through, _out_lists, restricted_permanent
from .treedec import (FORGET, INTRODUCE, JOIN, LEAF, NiceTreeDecomposition, TreeDecomposition,
                      heuristic_decomposition, make_nice, validate_decomposition)

DEFAULT_STATE_BUDGET = 2_000_000

# Node-indicator variables for the weight surgery.  A separate namespace
# keeps them apart from any Y variables already present in edge weights.
NODE_NS = "N"


@dataclass
class DPStats:
    states: int = 0
    max_states: int = 0
    longest_path: int = 0
    longest_cycle: int = 0


def _pair_weights(g: WeightedDigraph) -> dict:
    w: dict = {}
    for e in g.edge_list():
        key = (e.src, e.dst)
        w[key] = w.get(key, Poly.const(0)) + e.weight
    return {k: p for k, p in w.items() if not p.is_zero()}


def _index(state: tuple):
    starts, ends = {}, {}
    for p in state:
        starts[p[0]] = p
        ends[p[1]] = p
    return starts, ends


def _forget_options(state: tuple, x: int, bag: frozenset, has, c: int):
    """Ways to settle ``x``: yields (new_state, edge pairs used, closed cycle length or 0)."""
    starts, ends = _index(state)
    others = sorted(bag - {x})
    ps, pe = starts.get(x), ends.get(x)
    if ps is None and pe is None:
        yield state, (), 0
        return
    rest = [p for p in state if p is not ps and p is not pe]
    if ps is pe:  # untouched vertex: needs an in-edge and an out-edge
        if has(x, x) and c >= 1:
            yield tuple(rest), ((x, x),), 1
        for u in others:
            q1 = starts.get(u)
            if q1 is None or not has(x, u):
                continue
            for w in others:
                q2 = ends.get(w)
                if q2 is None or not has(w, x):
                    continue
                if q1 is q2:
                    L = q1[2] + 2
                    if L <= c:
                        yield tuple(sorted(p for p in rest if p is not q1)), ((w, x), (x, u)), L
                else:
                    L = q2[2] + q1[2] + 2
                    if L <= c - 1:
                        new = [p for p in rest if p is not q1 and p is not q2]
                        new.append((q2[0], q1[1], L))
                        yield tuple(sorted(new)), ((w, x), (x, u)), 0
    elif ps is not None:  # x starts a path and still needs an in-edge
        for w in others:
            q = ends.get(w)
            if q is None or not has(w, x):
                continue
            if q is ps:
                L = ps[2] + 1
                if L <= c:
                    yield tuple(sorted(rest)), ((w, x),), L
            else:
                L = q[2] + 1 + ps[2]
                if L <= c - 1:
                    new = [p for p in rest if p is not q]
                    new.append((q[0], ps[1], L))
                    yield tuple(sorted(new)), ((w, x),), 0
    else:  # x ends a path and still needs an out-edge
        for u in others:
            q = starts.get(u)
            if q is None or not has(x, u):
                continue
            if q is pe:
                L = pe[2] + 1
                if L <= c:
                    yield tuple(sorted(rest)), ((x, u),), L
            else:
                L = pe[2] + 1 + q[2]
                if L <= c - 1:
                    new = [p for p in rest if p is not q]
                    new.append((pe[0], q[1], L))
                    yield tuple(sorted(new)), ((x, u),), 0


def _join_states(s1: tuple, s2: tuple, bag: frozenset, c: int):
    """Glue two partial covers over the same bag; returns the merged state or None."""
    ends1 = {v for p in s1 for v in p[:2]}
    ends2 = {v for p in s2 for v in p[:2]}
    fresh1 = {p[0] for p in s1 if p[2] == 0}
    fresh2 = {p[0] for p in s2 if p[2] == 0}
    # A vertex settled on one side must be untouched on the other.
    if (bag - ends1) - fresh2 or (bag - ends2) - fresh1:
        return None
    succ: dict = {}
    has_in: set = set()
    for p in itertools.chain(s1, s2):
        if p[2] == 0:
            continue
        s, e, L = p
        if s in succ or e in has_in:
            return None
        succ[s] = (e, L)
        has_in.add(e)
    out = []
    done = set()
    for v in sorted(fresh1 & fresh2):
        if v not in succ and v not in has_in:
            out.append((v, v, 0))
    for s in sorted(succ):
        if s in has_in:
            continue
        total, cur = 0, s
        while cur in succ:
            done.add(cur)
            nxt, L = succ[cur]
            total += L
            cur = nxt
        if total > c - 1:
            return None
        out.append((s, cur, total))
    for s in sorted(succ):
        if s in done:
            continue
        total, cur = 0, s
        while True:
            done.add(cur)
            nxt, L = succ[cur]
            total += L
            cur = nxt
            if cur == s:
                break
        if total > c:
            return None
    return tuple(sorted(out))


def dp_per_le_c(g: WeightedDigraph, nt: NiceTreeDecomposition, c: int,
                budget: int = DEFAULT_STATE_BUDGET, stats: DPStats | None = None,
                validate: bool = True) -> Circuit:
    """Circuit computing the sum over covers of ``g`` whose cycles all have length <= c."""
    if validate:
        problems = nt.check()
        rep = validate_decomposition(g, nt.as_decomposition())
        problems += rep.problems
        if problems:
            raise InvalidDecomposition("; ".join(problems))
    stats = stats if stats is not None else DPStats()
    weights = _pair_weights(g)
    has = lambda a, b: (a, b) in weights  # noqa: E731
    cb = CircuitBuilder()
    wgate: dict = {}

    def weight_gate(pair) -> int:
        if pair not in wgate:
            wgate[pair] = cb.poly(weights[pair])
        return wgate[pair]

    one = cb.const(1)
    tables: list = [None] * len(nt.nodes)
    for i, nd in enumerate(nt.nodes):
        acc: dict = {}
        if nd.kind == LEAF:
            acc[()] = [one]
        elif nd.kind == INTRODUCE:
            x = nd.vertex
            for st, gid in tables[nd.children[0]].items():
                acc.setdefault(tuple(sorted(st + ((x, x, 0),))), []).append(gid)
        elif nd.kind == FORGET:
            x = nd.vertex
            child = nt.nodes[nd.children[0]]
            for st, gid in tables[nd.children[0]].items():
                for new, pairs, closed in _forget_options(st, x, child.bag, has, c):
                    if closed:
                        assert closed <= c, "cycle longer than c"
                        stats.longest_cycle = max(stats.longest_cycle, closed)
                    term = gid if not pairs else cb.mul(gid, *(weight_gate(p) for p in pairs))
                    acc.setdefault(new, []).append(term)
        elif nd.kind == JOIN:
            t1, t2 = tables[nd.children[0]], tables[nd.children[1]]
            for (s1, g1), (s2, g2) in itertools.product(t1.items(), t2.items()):
                new = _join_states(s1, s2, nd.bag, c)
                if new is not None:
                    acc.setdefault(new, []).append(cb.mul(g1, g2))
        else:
            raise InvalidDecomposition(f"unknown node kind {nd.kind!r}")
        table = {}
        for st, terms in acc.items():
            for s, e, L in st:
                assert s in nd.bag and e in nd.bag, "path endpoint left the bag"
                assert L - 1 <= c - 2, "path interior longer than c-2"
                stats.longest_path = max(stats.longest_path, L)
            table[st] = terms[0] if len(terms) == 1 else cb.add(*terms)
        stats.states += len(table)
        stats.max_states = max(stats.max_states, len(table))
        if stats.states > budget:
            raise StateBudgetExceeded(f"more than {budget} DP states")
        tables[i] = table
        for ch in nd.children:
            tables[ch] = None
    root = tables[nt.root]
    out = root.get((), cb.const(0))
    return cb.build(out)


def per_le_c_circuit(g: WeightedDigraph, c: int, decomposition: TreeDecomposition | None = None,
                     budget: int = DEFAULT_STATE_BUDGET) -> Circuit:
    """Convenience wrapper: heuristic decomposition when none is given."""
    if g.n == 0:
        cb = CircuitBuilder()
        return cb.build(cb.const(1))
    t = decomposition if decomposition is not None else heuristic_decomposition(g)
    return dp_per_le_c(g, make_nice(t), c, budget=budget)


# -- formula expansion ------------------------------------------------------------------

def expanded_size(c: Circuit) -> int:
    size = [0] * len(c.gates)
    for g in c.gates:
        size[g.id] = 1 + sum(size[ch] for ch in g.children)
    return size[c.output]


def expand_to_formula(c: Circuit, size_budget: int = 1_000_000) -> Formula:
    """Tree expansion of a circuit: every shared gate is copied once per use."""
    if c.is_formula():
        return Formula(c.gates, c.output, c.constant_free, c.bounded_fanin)
    total = expanded_size(c)
    if total > size_budget:
        raise SizeBudgetExceeded(f"expanded formula would have {total} gates (budget {size_budget})")
    cb = CircuitBuilder()
    # Iterative post-order copy; recursion depth would follow circuit depth.
    stack = [(c.output, False)]
    results: list = []
    while stack:
        gid, expanded = stack.pop()
        g = c.gates[gid]
        if g.kind == VAR:
            results.append(cb.var(g.var, shared=False))
        elif g.kind == CONST:
            results.append(cb.const(g.value, shared=False))
        elif not expanded:
            stack.append((gid, True))
            for ch in reversed(g.children):
                stack.append((ch, False))
        else:
            kids = results[-len(g.children):]
            del results[-len(g.children):]
            results.append(cb.add(*kids) if g.kind == ADD else cb.mul(*kids))
    return cb.build(results[0], constant_free=c.constant_free, cls=Formula)


def height_envelope(c: Circuit, height: int) -> float:
    """log of expanded size divided by decomposition height (growth per level)."""
    return math.log2(max(expanded_size(c), 2)) / max(height, 1)


# -- membership composition ------------------------------------------------------------

def simple_cycles_of_length(g: WeightedDigraph, k: int) -> list:
    """Every simple directed cycle with exactly ``k`` edges, as edge-id tuples."""
    out = _out_lists(g)
    found = []
    for v in range(g.n):
        lower = (1 << v) - 1
        for edges, nodes in _cycles_through(v, out, lower, k):
            if len(edges) == k:
                found.append(edges)
    return found


def cyc_circuit(g: WeightedDigraph, k: int) -> Circuit:
    """Arithmetized k-cycle test over edge variables ``E.id``.

    On 0/1 points of weight k it is 1 exactly when the chosen edges form one
    k-cycle: an OR over the k-cycles of the AND of their edges.
    """
    bb = BoolBuilder()
    terms = [bb.and_(*(bb.var(var("E", eid)) for eid in cyc)) for cyc in simple_cycles_of_length(g, k)]
    if not terms:
        return arithmetize(bb.build(bb.const(0)))
    return arithmetize(bb.build(bb.or_(*terms)))


def surgery_graph(g: WeightedDigraph, v2) -> tuple:
    """G'[V2] with node variables N_i: off-diagonal (1-N_i)w, diagonal (1-N_i)w(i,i)+N_i.

    Returns ``(graph, old_to_new)``.
    """
    sub, remap = g.induced(v2)
    inv = {new: old for old, new in remap.items()}
    h = WeightedDigraph(sub.n)
    loops: dict = {}
    for e in sub.edge_list():
        n_i = Poly.variable(var(NODE_NS, inv[e.src]))
        if e.is_loop:
            loops[e.src] = loops.get(e.src, Poly.const(0)) + e.weight
        else:
            h.add_edge(e.src, e.dst, (1 - n_i) * e.weight, eid=e.id)
    for v in range(sub.n):
        n_i = Poly.variable(var(NODE_NS, inv[v]))
        h.add_edge(v, v, (1 - n_i) * loops.get(v, Poly.const(0)) + n_i)
    return h, remap


@dataclass
class MembershipResult:
    value: Poly
    cycles_used: int
    v2_circuit_size: int
    details: dict = field(default_factory=dict)


def membership_polynomial(g: WeightedDigraph, v1, v2, k: int, c: int,
                          decomposition: TreeDecomposition | None = None,
                          mode: str = "cycles", budget: int = 200_000,
                          result: bool = False):
    """Restricted permanent assembled from a k-cycle choice, V1 loops and a V2 DP circuit.

    ``mode="cycles"`` walks the simple k-cycles directly; ``mode="subsets"``
    runs over every k-subset of edges and filters with the arithmetized
    cycle test.  ``decomposition`` is over original node ids of ``v2``.
    """
    v1, v2 = sorted(set(v1)), sorted(set(v2))
    loop_w: dict = {}
    for e in g.edge_list():
        if e.is_loop:
            loop_w[e.src] = loop_w.get(e.src, Poly.const(0)) + e.weight
    h, remap = surgery_graph(g, v2)
    if decomposition is not None:
        t = TreeDecomposition({i: {remap[v] for v in bag if v in remap}
                               for i, bag in decomposition.bags.items()}, decomposition.tree_edges)
    else:
        t = None
    circ = per_le_c_circuit(h, c, t) if v2 else None

    if mode == "cycles":
        selections = simple_cycles_of_length(g, k)
        if len(selections) > budget:
            raise BudgetExceeded(f"{len(selections)} k-cycles exceed budget {budget}")
    elif mode == "subsets":
        m = len(g.edges)
        if math.comb(m, k) > budget:
            raise BudgetExceeded(f"C({m},{k}) edge subsets exceed budget {budget}")
        cyc = cyc_circuit(g, k)
        ids = sorted(g.edges)
        selections = []
        for sel in itertools.combinations(ids, k):
            chosen = set(sel)
            point = {var("E", i): int(i in chosen) for i in ids}
            if circuit_eval_point(cyc, point) == 1:
                selections.append(sel)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    v2_cache: dict = {}
    total = Poly.const(0)
    for sel in selections:
        touched = set()
        for eid in sel:
            touched.add(g.edges[eid].src)
            touched.add(g.edges[eid].dst)
        term = g.weight_of(sel)
        for i in v1:
            if i not in touched:
                term = term * loop_w.get(i, Poly.const(0))
            if term.is_zero():
                break
        if term.is_zero():
            continue
        if circ is not None:
            key = frozenset(touched & set(v2))
            if key not in v2_cache:
                point = {var(NODE_NS, i): Poly.const(int(i in key)) for i in v2}
                v2_cache[key] = circuit_eval_poly(circ, subst=point)
            term = term * v2_cache[key]
        total = total + term
    if result:
        return MembershipResult(total, len(selections), circ.size if circ else 0,
                                {"distinct_v2_patterns": len(v2_cache)})
    return total


def verify_membership(g: WeightedDigraph, v1, v2, k: int, c: int,
                      decomposition: TreeDecomposition | None = None, mode: str = "cycles") -> dict:
    lhs = membership_polynomial(g, v1, v2, k, c, decomposition, mode=mode)
    rhs = restricted_permanent(g, k, c)
    return {"ok": lhs == rhs, "membership": lhs, "oracle": rhs}
