"""Weighted digraphs, cycle covers and restricted permanents.

Two independent routes compute every cover sum:

* :func:`enumerate_covers` materializes each cycle cover (least uncovered
  node first, cycles anchored at their minimal node) and is the oracle.
* :func:`cover_sum` runs the same backtracking but memoizes on the set of
  covered nodes, so it only ever holds polynomials, never covers.  The
  restricted permanents are built on it.
"""

from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import networkx as nx

from .algebra import Poly, Var, poly_sum, var
from .errors import BudgetExceeded, ParseError

DEFAULT_BUDGET = 10**7


@dataclass(frozen=True)
class Edge:
    id: int
    src: int
    dst: int
    weight: Poly

    @property
    def is_loop(self) -> bool:
        return self.src == self.dst


class WeightedDigraph:
    """Directed multigraph on nodes ``0..n-1`` with polynomial edge weights.

    Parallel edges and self-loops are allowed; edges are addressed by id.
    Graphs are built incrementally by the compilers and treated as
    read-only afterwards.
    """

    def __init__(self, n: int = 0):
        self.n = n
        self.edges: dict = {}
        self._next_id = 0
        self.labels: dict = {}

    def add_node(self, label=None) -> int:
        v = self.n
        self.n += 1
        if label is not None:
            self.labels[v] = label
        return v

    def add_edge(self, src: int, dst: int, weight=1, eid: int | None = None) -> int:
        if not (0 <= src < self.n and 0 <= dst < self.n):
            raise ValueError(f"edge ({src},{dst}) outside node range 0..{self.n - 1}")
        if eid is None:
            eid = self._next_id
        if eid in self.edges:
            raise ValueError(f"duplicate edge id {eid}")
        self._next_id = max(self._next_id, eid + 1)
        self.edges[eid] = Edge(eid, src, dst, Poly.promote(weight))
        return eid

    def remove_edge(self, eid: int) -> Edge:
        return self.edges.pop(eid)

    def set_weight(self, eid: int, weight) -> None:
        e = self.edges[eid]
        self.edges[eid] = Edge(eid, e.src, e.dst, Poly.promote(weight))

    def copy(self) -> "WeightedDigraph":
        g = WeightedDigraph(self.n)
        g.edges = dict(self.edges)
        g._next_id = self._next_id
        g.labels = dict(self.labels)
        return g

    def relabel(self, order: Sequence[int]) -> "WeightedDigraph":
        """Copy whose node ``i`` is old node ``order[i]``; edge ids are kept."""
        pos = {v: i for i, v in enumerate(order)}
        if sorted(pos) != list(range(self.n)):
            raise ValueError("order must be a permutation of the nodes")
        g = WeightedDigraph(self.n)
        for e in self.edge_list():
            g.add_edge(pos[e.src], pos[e.dst], e.weight, eid=e.id)
        g.labels = {pos[v]: lab for v, lab in self.labels.items()}
        return g

    def edge_list(self) -> list:
        return [self.edges[i] for i in sorted(self.edges)]

    def out_edges(self, v: int) -> list:
        return [e for e in self.edge_list() if e.src == v]

    def in_edges(self, v: int) -> list:
        return [e for e in self.edge_list() if e.dst == v]

    def loops(self, v: int) -> list:
        return [e for e in self.edge_list() if e.src == v and e.dst == v]

    def find_edges(self, src: int, dst: int) -> list:
        return [e for e in self.edge_list() if e.src == src and e.dst == dst]

    def weight_of(self, edge_ids: Iterable[int]) -> Poly:
        w = Poly.const(1)
        for i in edge_ids:
            w = w * self.edges[i].weight
        return w

    def induced(self, nodes: Iterable[int]) -> tuple:
        """Induced subgraph on ``nodes``, renumbered in sorted order.

        Returns ``(graph, old_to_new)``; edge ids are preserved.
        """
        nodes = sorted(set(nodes))
        remap = {v: i for i, v in enumerate(nodes)}
        sub = WeightedDigraph(len(nodes))
        for e in self.edge_list():
            if e.src in remap and e.dst in remap:
                sub.add_edge(remap[e.src], remap[e.dst], e.weight, eid=e.id)
        sub.labels = {remap[v]: lab for v, lab in self.labels.items() if v in remap}
        return sub, remap

    def undirected(self) -> nx.Graph:
        """Underlying simple undirected graph, self-loops dropped."""
        u = nx.Graph()
        u.add_nodes_from(range(self.n))
        u.add_edges_from((e.src, e.dst) for e in self.edges.values() if not e.is_loop)
        return u

    def to_networkx(self) -> nx.DiGraph:
        d = nx.DiGraph()
        d.add_nodes_from(range(self.n))
        d.add_edges_from((e.src, e.dst) for e in self.edges.values())
        return d

    # -- text format ------------------------------------------------------------
    def to_text(self) -> str:
        lines = [f"DIGRAPH {self.n} {len(self.edges)}"]
        for e in self.edge_list():
            lines.append(f"{e.id} {e.src} {e.dst} {format_weight(e.weight)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "WeightedDigraph":
        lines = [ln.split() for ln in text.strip().splitlines() if ln.strip() and not ln.startswith("#")]
        if not lines or lines[0][0] != "DIGRAPH" or len(lines[0]) != 3:
            raise ParseError("expected 'DIGRAPH n_nodes n_edges' header")
        try:
            n, m = int(lines[0][1]), int(lines[0][2])
            if m != len(lines) - 1:
                raise ParseError(f"header declares {m} edges, found {len(lines) - 1}")
            g = cls(n)
            for parts in lines[1:]:
                if len(parts) != 4:
                    raise ParseError(f"bad edge line {' '.join(parts)!r}")
                g.add_edge(int(parts[1]), int(parts[2]), parse_weight(parts[3]), eid=int(parts[0]))
            return g
        except ValueError as exc:
            raise ParseError(str(exc)) from None


def format_weight(p: Poly) -> str:
    """Single-token weight: ``;``-joined terms like ``-2`` or ``3*X.1^2*Y.0^1``."""
    if p.is_zero():
        return "0"
    parts = []
    for m, c in p.sorted_terms():
        parts.append("*".join([str(c)] + [f"{v}^{e}" for v, e in m]))
    return ";".join(parts)


def parse_weight(text: str) -> Poly:
    terms: dict = {}
    for term in text.split(";"):
        coeff, *factors = term.split("*")
        exps: dict = {}
        for f in factors:
            name, _, e = f.partition("^")
            v = Var.parse(name)
            exps[v] = exps.get(v, 0) + (int(e) if e else 1)
        mono = tuple(sorted(exps.items()))
        terms[mono] = terms.get(mono, 0) + int(coeff)
    return Poly(terms)


def couplings_to_text(couplings: Sequence[tuple]) -> str:
    return "".join(f"COUPLE {a} {b}\n" for a, b in couplings)


def couplings_from_text(text: str) -> list:
    out = []
    for ln in text.splitlines():
        parts = ln.split()
        if not parts:
            continue
        if parts[0] != "COUPLE" or len(parts) != 3:
            raise ParseError(f"bad coupling line {ln!r}")
        out.append((int(parts[1]), int(parts[2])))
    return out


# -- cycle covers -----------------------------------------------------------------

@dataclass(frozen=True)
class CycleCover:
    """Edge-id cycles; each cycle starts with the out-edge of its minimal node."""

    cycles: tuple

    @property
    def edge_ids(self) -> frozenset:
        return frozenset(i for c in self.cycles for i in c)

    def lengths(self) -> list:
        return sorted(len(c) for c in self.cycles)

    def weight(self, g: WeightedDigraph) -> Poly:
        return g.weight_of(self.edge_ids)


@dataclass(frozen=True)
class LengthFilter:
    """Admissible cycle-length profiles.

    ``c`` bounds every cycle (``None`` means unbounded).  When ``k`` is set,
    a cover needs at least one cycle of length exactly ``k``; every other
    cycle must have length ``<= c``.  For ``k > c`` that means exactly one
    long cycle, for ``k <= c`` any cover with some ``k``-cycle qualifies and
    is counted once.
    """

    c: int | None = None
    k: int | None = None

    def cycle_ok(self, length: int) -> bool:
        return self.c is None or length <= self.c or length == self.k

    def max_len(self, n: int) -> int:
        bound = n if self.c is None else min(self.c, n)
        if self.k is not None:
            bound = max(bound, self.k)
        return bound

    def accepts(self, lengths: Sequence[int]) -> bool:
        if not all(self.cycle_ok(L) for L in lengths):
            return False
        if self.k is None:
            return True
        long_ones = sum(1 for L in lengths if L == self.k)
        if long_ones == 0:
            return False
        if self.c is not None and self.k > self.c:
            return long_ones == 1
        return True


def _out_lists(g: WeightedDigraph) -> list:
    out = [[] for _ in range(g.n)]
    for e in g.edge_list():
        out[e.src].append((e.id, e.dst))
    return out


def _cycles_through(v: int, out: list, covered: int, max_len: int):
    """Simple cycles through ``v`` avoiding ``covered`` (a node bitmask).

    Yields ``(edge_ids, nodes)``; the cycle is anchored at ``v``.
    """
    path_edges: list = []
    path_nodes = [v]
    on_path = covered | (1 << v)

    def dfs(u: int):
        nonlocal on_path
        for eid, w in out[u]:
            if w == v:
                yield tuple(path_edges) + (eid,), tuple(path_nodes)
            elif not (on_path >> w) & 1 and len(path_edges) + 1 < max_len:
                path_edges.append(eid)
                path_nodes.append(w)
                on_path |= 1 << w
                yield from dfs(w)
                on_path &= ~(1 << w)
                path_nodes.pop()
                path_edges.pop()

    yield from dfs(v)


def enumerate_covers(g: WeightedDigraph, filter: Callable | LengthFilter | None = None,
                     budget: int = DEFAULT_BUDGET, max_len: int | None = None) -> list:
    """Every cycle cover accepted by ``filter``, each exactly once.

    ``filter`` is a :class:`LengthFilter` or any predicate on a
    :class:`CycleCover`.  ``max_len`` only prunes the search.
    """
    if isinstance(filter, LengthFilter):
        lf = filter
        pred = lambda cov: lf.accepts([len(c) for c in cov.cycles])  # noqa: E731
        if max_len is None:
            max_len = lf.max_len(g.n)
    else:
        pred = filter
    if max_len is None:
        max_len = g.n
    out = _out_lists(g)
    full = (1 << g.n) - 1
    steps = [0]
    result: list = []
    chosen: list = []

    def rec(covered: int):
        steps[0] += 1
        if steps[0] > budget:
            raise BudgetExceeded(f"cover enumeration visited more than {budget} states")
        if covered == full:
            cov = CycleCover(tuple(chosen))
            if pred is None or pred(cov):
                result.append(cov)
            return
        v = _lowest_zero(covered)
        for edges, nodes in _cycles_through(v, out, covered, max_len):
            mask = covered
            for u in nodes:
                mask |= 1 << u
            chosen.append(edges)
            rec(mask)
            chosen.pop()

    with _deep_recursion(g.n):
        rec(0)
    return result


def _lowest_zero(mask: int) -> int:
    return (~mask & (mask + 1)).bit_length() - 1


class _deep_recursion:
    def __init__(self, n: int):
        self.need = 4 * n + 200

    def __enter__(self):
        self.old = sys.getrecursionlimit()
        if self.old < self.need:
            sys.setrecursionlimit(self.need)

    def __exit__(self, *exc):
        sys.setrecursionlimit(self.old)


def cover_sum(g: WeightedDigraph, lf: LengthFilter = LengthFilter(),
              couplings: Sequence[tuple] = (), mode: str = "consistent",
              budget: int = DEFAULT_BUDGET, reorder: bool = True) -> Poly:
    """Memoized sum of cover weights under a length filter.

    With ``couplings`` (pairs of edge ids), ``mode`` selects covers that
    respect every pair (``"consistent"``), violate at least one
    (``"inconsistent"``), or ignores them (``"all"``).  An edge's fate is
    known once its source node is covered; pairs with one known side are
    carried in the memo key.
    """
    if mode not in ("consistent", "inconsistent", "all"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "all":
        couplings = ()
    if reorder and g.n > 2:
        # Low bandwidth keeps the set of partially covered nodes, and with it
        # the memo, small.
        g = g.relabel(list(nx.utils.reverse_cuthill_mckee_ordering(g.undirected())))
    out = _out_lists(g)
    max_len = lf.max_len(g.n)
    full = (1 << g.n) - 1
    srcs = [(g.edges[a].src, g.edges[b].src) for a, b in couplings]
    by_node: dict = {}
    for ci, (sa, sb) in enumerate(srcs):
        by_node.setdefault(sa, []).append(ci)
        by_node.setdefault(sb, []).append(ci)
    need_long = lf.k is not None
    single_long = need_long and lf.c is not None and lf.k > lf.c
    memo: dict = {}
    steps = [0]

    def rec(covered: int, has_long: bool, pending: tuple, bad: bool) -> Poly:
        key = (covered, has_long, pending, bad)
        hit = memo.get(key)
        if hit is not None:
            return hit
        steps[0] += 1
        if steps[0] > budget:
            raise BudgetExceeded(f"cover sum visited more than {budget} states")
        if covered == full:
            ok = (has_long or not need_long) and (mode != "inconsistent" or bad)
            res = Poly.const(1) if ok else Poly.const(0)
            memo[key] = res
            return res
        v = _lowest_zero(covered)
        terms = []
        for edges, nodes in _cycles_through(v, out, covered, max_len):
            L = len(edges)
            is_long = need_long and L == lf.k
            if not lf.cycle_ok(L):
                continue
            if is_long and single_long and has_long:
                continue
            mask = covered
            for u in nodes:
                mask |= 1 << u
            nb = bad
            npend = pending
            if couplings:
                touched = set()
                for u in nodes:
                    touched.update(by_node.get(u, ()))
                if touched:
                    npend, violated = _update_pending(pending, touched, couplings, srcs,
                                                      covered, mask, edges, g)
                    if violated:
                        if mode == "consistent":
                            continue
                        nb = True
            sub = rec(mask, has_long or is_long, npend, nb)
            if sub:
                terms.append(g.weight_of(edges) * sub)
        res = poly_sum(terms)
        memo[key] = res
        return res

    with _deep_recursion(g.n):
        return rec(0, False, (), False)


def _update_pending(pending, touched, couplings, srcs, old_mask, new_mask, cycle_edges, g):
    pend = dict(pending)
    chosen = set(cycle_edges)
    violated = False
    for ci in sorted(touched):
        sa, sb = srcs[ci]
        a_known_before = (old_mask >> sa) & 1
        b_known_before = (old_mask >> sb) & 1
        a_known = (new_mask >> sa) & 1
        b_known = (new_mask >> sb) & 1
        ea, eb = couplings[ci]
        if a_known and b_known:
            if a_known_before:
                bit_a = pend.pop(ci)
            else:
                bit_a = ea in chosen
            if b_known_before:
                bit_b = pend.pop(ci)
            else:
                bit_b = eb in chosen
            if bit_a != bit_b:
                violated = True
        elif a_known and not a_known_before:
            pend[ci] = ea in chosen
        elif b_known and not b_known_before:
            pend[ci] = eb in chosen
    return tuple(sorted(pend.items())), violated


def is_consistent(cover: CycleCover, couplings: Sequence[tuple]) -> bool:
    ids = cover.edge_ids
    return all((a in ids) == (b in ids) for a, b in couplings)


# -- permanents ---------------------------------------------------------------------

def permanent_bruteforce(matrix: Sequence[Sequence], budget: int = 9) -> Poly:
    """Sum over all permutations of row products."""
    n = len(matrix)
    if n > budget:
        raise BudgetExceeded(f"n={n} exceeds permutation budget {budget}")
    rows = [[Poly.promote(x) for x in row] for row in matrix]
    total = Poly.const(0)
    for perm in itertools.permutations(range(n)):
        term = Poly.const(1)
        for i, j in enumerate(perm):
            term = term * rows[i][j]
            if not term:
                break
        total = total + term
    return total


def restricted_permanent(g: WeightedDigraph, k: int, c: int, budget: int = DEFAULT_BUDGET) -> Poly:
    return cover_sum(g, LengthFilter(c=c, k=k), mode="all", budget=budget)


def per_le_c(g: WeightedDigraph, c: int, budget: int = DEFAULT_BUDGET) -> Poly:
    return cover_sum(g, LengthFilter(c=c), mode="all", budget=budget)


def consistent_cover_sum(g: WeightedDigraph, couplings: Sequence[tuple],
                         filter: LengthFilter = LengthFilter(), budget: int = DEFAULT_BUDGET) -> Poly:
    return cover_sum(g, filter, couplings, mode="consistent", budget=budget)


def consistent_covers(g: WeightedDigraph, couplings: Sequence[tuple],
                      filter: LengthFilter = LengthFilter(), budget: int = DEFAULT_BUDGET) -> list:
    """Explicit list of coupling-respecting covers (oracle side)."""
    covers = enumerate_covers(g, filter, budget=budget)
    return [cv for cv in covers if is_consistent(cv, couplings)]


# -- standard graphs ------------------------------------------------------------------

def complete_digraph(n: int, ns: str = "X", loops: bool = True) -> WeightedDigraph:
    """Complete digraph with weight ``X_{i,j}`` on edge (i, j), 1-based indices."""
    g = WeightedDigraph(n)
    for i in range(n):
        for j in range(n):
            if i != j or loops:
                g.add_edge(i, j, Poly.variable(var(ns, i + 1, j + 1)))
    return g


def matrix_of(g: WeightedDigraph) -> list:
    """Adjacency matrix with parallel-edge weights summed."""
    m = [[Poly.const(0)] * g.n for _ in range(g.n)]
    for e in g.edge_list():
        m[e.src][e.dst] = m[e.src][e.dst] + e.weight
    return m


@dataclass
class EnumerationGadget:
    graph: WeightedDigraph
    s: list
    t: list
    y_edges: list
    connecting: dict = field(default_factory=dict)


def build_Rn(n: int) -> EnumerationGadget:
    """y-edges s_i -> t_i, connecting edges t_j -> s_l for j != l, loops everywhere."""
    if n < 1:
        raise ValueError("n must be at least 1")
    g = WeightedDigraph()
    s, t = [], []
    for i in range(n):
        s.append(g.add_node(("s", i + 1)))
        t.append(g.add_node(("t", i + 1)))
    y_edges = [g.add_edge(s[i], t[i]) for i in range(n)]
    connecting = {}
    for j in range(n):
        for l in range(n):
            if j != l:
                connecting[(j, l)] = g.add_edge(t[j], s[l])
    for v in range(g.n):
        g.add_edge(v, v)
    return EnumerationGadget(g, s, t, y_edges, connecting)


def matchings_via_22perm(n: int, budget: int = DEFAULT_BUDGET) -> Poly:
    """Matching polynomial of K_n read off the (<=2)-cycle covers of the complete digraph."""
    g = complete_digraph(n)
    subst = {}
    for i in range(1, n + 1):
        subst[var("X", i, i)] = Poly.const(1)
        for j in range(1, i):
            subst[var("X", i, j)] = Poly.const(1)
    h = WeightedDigraph(n)
    for e in g.edge_list():
        h.add_edge(e.src, e.dst, e.weight.substitute(subst), eid=e.id)
    return per_le_c(h, 2, budget=budget)


def matching_polynomial_bruteforce(n: int) -> Poly:
    """Sum over matchings of K_n of prod X_{i,j} (i < j), by edge-subset enumeration."""
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    total = Poly.const(0)
    for r in range(n // 2 + 1):
        for sel in itertools.combinations(pairs, r):
            used = [v for p in sel for v in p]
            if len(used) == len(set(used)):
                term = Poly.const(1)
                for i, j in sel:
                    term = term * Poly.variable(var("X", i, j))
                total = total + term
    return total


# -- (c,b)-niceness -------------------------------------------------------------------

def undirected_girth(g: WeightedDigraph, nodes: Iterable[int]) -> float:
    """Girth of the undirected multigraph induced on ``nodes``, loops ignored.

    Two distinct non-loop edges between the same pair (either direction)
    already form a cycle of length 2.
    """
    nodes = set(nodes)
    pair_count: dict = {}
    for e in g.edges.values():
        if e.is_loop or e.src not in nodes or e.dst not in nodes:
            continue
        key = (min(e.src, e.dst), max(e.src, e.dst))
        pair_count[key] = pair_count.get(key, 0) + 1
    if any(cnt >= 2 for cnt in pair_count.values()):
        return 2
    simple = nx.Graph()
    simple.add_nodes_from(nodes)
    simple.add_edges_from(pair_count)
    girth = nx.girth(simple)
    return girth


@dataclass
class NiceReport:
    c: int
    b: int
    girth_v1: float
    girth_ok: bool
    loops_ok: bool
    missing_loops: list
    decomposition_ok: bool
    width: int | None
    width_ok: bool
    short_mixed_cycles: list
    mixed_ok: bool
    problems: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.girth_ok and self.loops_ok and self.decomposition_ok and self.width_ok and self.mixed_ok


def validate_nice(g: WeightedDigraph, v1: Iterable[int], v2: Iterable[int], c: int, b: int,
                  decomposition=None) -> NiceReport:
    """Check the four (c,b)-niceness conditions for the partition ``(v1, v2)``.

    ``decomposition`` is a tree decomposition of ``G[v2]`` in original node
    ids; it is required unless ``v2`` is empty.
    """
    from .treedec import TreeDecomposition, validate_decomposition

    v1, v2 = set(v1), set(v2)
    problems = []
    if v1 & v2 or (v1 | v2) != set(range(g.n)):
        problems.append("v1/v2 is not a partition of the node set")
    girth = undirected_girth(g, v1)
    girth_ok = girth > c
    if not girth_ok:
        problems.append(f"girth of G[V1] is {girth} <= {c}")
    looped = {e.src for e in g.edges.values() if e.is_loop}
    missing = sorted(v1 - looped)
    if missing:
        problems.append(f"V1 nodes without self-loop: {missing}")
    sub, remap = g.induced(v2)
    if not v2:
        dec_ok, width = True, -1
    elif decomposition is None:
        dec_ok, width = False, None
        problems.append("no tree decomposition supplied for G[V2]")
    else:
        renamed = TreeDecomposition(
            {i: frozenset(remap[v] for v in bag if v in remap) for i, bag in decomposition.bags.items()},
            list(decomposition.tree_edges),
        )
        rep = validate_decomposition(sub, renamed)
        dec_ok, width = rep.valid, rep.width
        if not dec_ok:
            problems.extend(rep.problems)
    width_ok = width is not None and width <= b
    if width is not None and not width_ok:
        problems.append(f"decomposition width {width} > {b}")
    mixed = []
    for cyc in nx.simple_cycles(g.to_networkx(), length_bound=c):
        s = set(cyc)
        if s & v1 and s & v2:
            mixed.append(cyc)
    if mixed:
        problems.append(f"{len(mixed)} mixed cycles of length <= {c}")
    return NiceReport(c, b, girth, girth_ok, not missing, missing, dec_ok, width, width_ok,
                      mixed, not mixed, problems)


def partition_to_text(v1: Iterable[int], v2: Iterable[int]) -> str:
    return "V1: " + " ".join(map(str, sorted(v1))) + "\nV2: " + " ".join(map(str, sorted(v2))) + "\n"


def partition_from_text(text: str) -> tuple:
    parts: dict = {}
    for ln in text.splitlines():
        if not ln.strip():
            continue
        name, _, rest = ln.partition(":")
        if name.strip() not in ("V1", "V2"):
            raise ParseError(f"bad partition line {ln!r}")
        parts[name.strip()] = [int(x) for x in rest.split()]
    return parts.get("V1", []), parts.get("V2", [])


def telephone_number(n: int) -> int:
    """Number of matchings of K_n."""
    return sum(math.comb(n, 2 * j) * math.prod(range(2 * j - 1, 0, -2)) for j in range(n // 2 + 1))
