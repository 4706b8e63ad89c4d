"""Formula-to-graph compilation for restricted permanents.

Stages:

* G1: one gadget per gate of a layered formula.  Consistent covers (every
  coupled pair of edges both in or both out) correspond to parse trees.
* G2: adds the enumeration gadget R_n and chains each y-edge to the loops
  carrying Y_i, then drops the Y weights.
* G3: replaces each coupling by a signed gadget on nodes a..e, so that
  inconsistent covers cancel and each gadget contributes a factor 2.

Node numbering is deterministic: formula preorder, then R_n, then gadget
nodes in coupling order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .algebra import Poly, Var, var
from .circuit import ADD, CONST, MUL, VAR, Circuit, circuit_eval_poly, is_layered, layer_formula
from .errors import NotLayered, YVariableMisplaced
from .expsum import SumSpec, weighted_sum_bruteforce
from .graph import (LengthFilter, WeightedDigraph, build_Rn, cover_sum, enumerate_covers,
                    restricted_permanent)
from .treedec import TreeDecomposition, heuristic_decomposition

Y_NS = "Y"


@dataclass
class GadgetGraph:
    graph: WeightedDigraph
    couplings: list
    provenance: dict
    top_node: int
    stage: str
    root_node: int | None = None
    y_vars: list = field(default_factory=list)
    y_edge_map: dict = field(default_factory=dict)
    y_loops: dict = field(default_factory=dict)       # Y var -> loop edge ids, preorder
    y_tops: dict = field(default_factory=dict)        # Y var -> input-gadget top nodes
    rn_nodes: list = field(default_factory=list)
    gadget_nodes: list = field(default_factory=list)  # per coupling: (a, b, c, d, e)
    gadget_edges: list = field(default_factory=list)  # per coupling: dict name -> edge id
    long_cycle_length: int | None = None
    ordered: bool = False

    @property
    def M(self) -> int:
        return len(self.couplings) if self.stage in ("g1", "g2") else len(self.gadget_nodes)

    def check(self) -> list:
        problems = []
        for a, b in self.couplings:
            if a not in self.graph.edges or b not in self.graph.edges:
                problems.append(f"coupling ({a},{b}) references a missing edge")
            if a == b:
                problems.append(f"coupling ({a},{b}) couples an edge with itself")
        for v in range(self.graph.n):
            if ("node", v) not in self.provenance:
                problems.append(f"node {v} has no provenance")
        for eid in self.graph.edges:
            if ("edge", eid) not in self.provenance:
                problems.append(f"edge {eid} has no provenance")
        return problems

    def provenance_text(self) -> str:
        lines = []
        for (kind, ident), tag in sorted(self.provenance.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            lines.append(f"{kind} {ident} " + " ".join(str(t) for t in tag))
        return "\n".join(lines) + "\n"


def prepare_formula(f: Circuit) -> Circuit:
    """Layered copy of ``f`` (unchanged if already layered)."""
    return f if is_layered(f) else layer_formula(f)


def compile_G1(f: Circuit) -> GadgetGraph:
    if not is_layered(f):
        raise NotLayered("formula must be layered: Add on top, Add/Mul alternating, leaves under Mul")
    g = WeightedDigraph()
    prov: dict = {}
    couplings: list = []
    y_loops: dict = {}
    y_tops: dict = {}

    def node(tag) -> int:
        v = g.add_node(tag)
        prov[("node", v)] = tag
        return v

    def edge(src, dst, w, tag) -> int:
        eid = g.add_edge(src, dst, w)
        prov[("edge", eid)] = tag
        return eid

    def build(gid: int, top: int | None):
        gate = f.gates[gid]
        if gate.kind in (VAR, CONST):
            tag = ("input", gid)
            p = top if top is not None else node(tag)
            q = node(tag)
            edge(p, q, 1, tag)
            edge(q, p, 1, tag)
            label = Poly.variable(gate.var) if gate.kind == VAR else Poly.const(gate.value)
            loop = edge(q, q, label, tag)
            if gate.kind == VAR and gate.var.ns == Y_NS:
                y_loops.setdefault(gate.var, []).append(loop)
                y_tops.setdefault(gate.var, []).append(p)
            return p
        if gate.kind == MUL:
            tag = ("mul", gid)
            ups, downs = [], []
            for ch in gate.children:
                t = node(tag)
                b = node(tag)
                edge(t, t, 1, tag)
                downs.append(edge(t, b, 1, tag))
                ups.append(edge(b, t, 1, tag))
                build(ch, b)
            for j in range(len(gate.children) - 1):
                couplings.append((ups[j], downs[j + 1]))
            return downs[0]
        tag = ("add", gid)
        t = top if top is not None else node(tag)
        b = node(tag)
        edge(t, b, 1, tag)
        edge(b, t, 1, tag)
        for ch in gate.children:
            cj = node(tag)
            edge(cj, cj, 1, tag)
            down = edge(b, cj, 1, tag)
            edge(cj, b, 1, tag)
            left = build(ch, None)
            couplings.append((down, left))
        return t

    top = build(f.output, None)
    r = node(("root", f.output))
    edge(r, top, 1, ("root", f.output))
    edge(top, r, 1, ("root", f.output))
    return GadgetGraph(g, couplings, prov, top, "g1", root_node=r, y_loops=y_loops, y_tops=y_tops)


def compile_G2(g1: GadgetGraph, y_vars, n: int | None = None, k: int | None = None) -> GadgetGraph:
    """Attach R_n for ``y_vars`` (in order), couple y-edges to their loop chains, drop Y weights."""
    y_vars = list(y_vars)
    if n is not None and n != len(y_vars):
        raise ValueError(f"n={n} but {len(y_vars)} Y variables given")
    if len(set(y_vars)) != len(y_vars):
        raise ValueError("repeated Y variable")
    g = g1.graph.copy()
    prov = dict(g1.provenance)
    loop_ids = {eid for ids in g1.y_loops.values() for eid in ids}
    for e in g.edge_list():
        ys = {v for v in e.weight.variables() if v.ns == Y_NS}
        if not ys:
            continue
        if e.id not in loop_ids or e.weight != Poly.variable(next(iter(ys))) or len(ys) != 1:
            raise YVariableMisplaced(f"edge {e.id} carries Y variables outside an input loop")
        if next(iter(ys)) not in y_vars:
            raise YVariableMisplaced(f"{next(iter(ys))} is not among the summation variables")
    couplings = list(g1.couplings)
    rn = build_Rn(len(y_vars)) if y_vars else None
    offset = g.n
    rn_nodes = []
    y_edge_map = {}
    if rn is not None:
        for v in range(rn.graph.n):
            w = g.add_node(rn.graph.labels[v])
            prov[("node", w)] = ("Rn",) + rn.graph.labels[v]
            rn_nodes.append(w)
        for e in rn.graph.edge_list():
            eid = g.add_edge(e.src + offset, e.dst + offset, e.weight)
            if e.id in rn.y_edges:
                i = rn.y_edges.index(e.id)
                prov[("edge", eid)] = ("Rn", "y", i + 1)
                y_edge_map[y_vars[i]] = eid
            elif e.src == e.dst:
                prov[("edge", eid)] = ("Rn", "loop", e.src + offset)
            else:
                prov[("edge", eid)] = ("Rn", "connect")
    for yv in y_vars:
        chain = [y_edge_map[yv]] + list(g1.y_loops.get(yv, []))
        for a, b in zip(chain, chain[1:]):
            couplings.append((a, b))
        for loop in g1.y_loops.get(yv, []):
            g.set_weight(loop, 1)
        for p in g1.y_tops.get(yv, []):
            eid = g.add_edge(p, p, 1)
            prov[("edge", eid)] = ("ytop", str(yv))
    return GadgetGraph(g, couplings, prov, g1.top_node, "g2", root_node=g1.root_node, y_vars=y_vars,
                       y_edge_map=y_edge_map, y_loops=dict(g1.y_loops), y_tops=dict(g1.y_tops),
                       rn_nodes=rn_nodes)


FAULTS = ("ay", "cloop")


def parse_fault(spec: str | None):
    """``ay:IDX`` turns gadget IDX's -2 into -1, ``cloop:IDX`` turns its -1 loop into +1."""
    if not spec:
        return None
    kind, _, idx = spec.partition(":")
    if kind not in FAULTS:
        raise ValueError(f"unknown fault {kind!r}; expected one of {FAULTS}")
    return kind, int(idx or 0)


def _lower(g2: GadgetGraph, ordered: bool, fault) -> GadgetGraph:
    g = g2.graph.copy()
    prov = dict(g2.provenance)
    gadget_nodes, gadget_edges = [], []

    def node(tag) -> int:
        v = g.add_node(tag)
        prov[("node", v)] = tag
        return v

    def edge(src, dst, w, tag, eid=None) -> int:
        eid = g.add_edge(src, dst, w, eid=eid)
        prov[("edge", eid)] = tag
        return eid

    def subdivide(eid: int, tag, tail_weight) -> tuple:
        """x -> y becomes x -> a (old id, old weight) and a -> y (new id)."""
        old = g.remove_edge(eid)
        old_tag = prov.pop(("edge", eid))
        a = node(tag)
        edge(old.src, a, old.weight, old_tag, eid=eid)
        tail = edge(a, old.dst, tail_weight, tag)
        return a, tail

    for idx, (e1, e2) in enumerate(g2.couplings):
        tag = ("iff", idx)
        a_w = -2
        c_w = -1
        if fault is not None and fault[1] == idx:
            if fault[0] == "ay":
                a_w = -1
            else:
                c_w = 1
        a, ay = subdivide(e1, tag, a_w)
        b, bv = subdivide(e2, tag, 1)
        c, d, e = node(tag), node(tag), node(tag)
        names = {"ay": ay, "bv": bv}
        names["ad"] = edge(a, d, 1, tag)
        names["db"] = edge(d, b, 1, tag)
        names["be"] = edge(b, e, 1, tag)
        names["ea"] = edge(e, a, 1, tag)
        names["ac"] = edge(a, c, 1, tag)
        names["ca"] = edge(c, a, 1, tag)
        names["bc"] = edge(b, c, 1, tag)
        names["cb"] = edge(c, b, 1, tag)
        for name, v in (("a", a), ("b", b), ("d", d), ("e", e)):
            names["loop_" + name] = edge(v, v, 1, tag)
        names["loop_c"] = edge(c, c, c_w, tag)
        gadget_nodes.append((a, b, c, d, e))
        gadget_edges.append(names)

    v1_extra = []
    coupled = {eid for pair in g2.couplings for eid in pair}
    for yv in g2.y_vars:
        eid = g2.y_edge_map[yv]
        if eid not in coupled:
            # Unused Y_i: a plain looped node keeps the y-path at three edges.
            z, _ = subdivide(eid, ("pad", str(yv)), 1)
            edge(z, z, 1, ("pad", str(yv)))
            v1_extra.append(z)

    n = len(g2.y_vars)
    if ordered and n:
        rn = g2.rn_nodes
        s = {i: rn[2 * i] for i in range(n)}
        t = {i: rn[2 * i + 1] for i in range(n)}
        hub = node(("ordered",))
        edge(hub, hub, 1, ("ordered",))
        v1_extra.append(hub)
        for e_ in g.edge_list():
            if prov.get(("edge", e_.id)) == ("Rn", "connect"):
                i = next(i for i in range(n) if t[i] == e_.src)
                j = next(j for j in range(n) if s[j] == e_.dst)
                if i > j:
                    g.remove_edge(e_.id)
                    prov.pop(("edge", e_.id))
        for i in range(1, n):
            edge(t[i], hub, 1, ("ordered", "in"))
        for j in range(n - 1):
            edge(hub, s[j], 1, ("ordered", "out"))

    out = GadgetGraph(g, [], prov, g2.top_node, "g3-ordered" if ordered else "g3",
                      root_node=g2.root_node, y_vars=list(g2.y_vars), y_edge_map=dict(g2.y_edge_map),
                      y_loops=dict(g2.y_loops), y_tops=dict(g2.y_tops),
                      rn_nodes=list(g2.rn_nodes) + v1_extra, gadget_nodes=gadget_nodes,
                      gadget_edges=gadget_edges, ordered=ordered)
    return out


def compile_G3(g2: GadgetGraph, inject_fault: str | None = None) -> GadgetGraph:
    return _lower(g2, False, parse_fault(inject_fault))


def compile_G3_ordered(g2: GadgetGraph, inject_fault: str | None = None) -> GadgetGraph:
    return _lower(g2, True, parse_fault(inject_fault))


def long_cycle_length(g3: GadgetGraph, k: int) -> int:
    return 3 * k + (1 if g3.ordered else 0)


def nice_partition(g3: GadgetGraph) -> tuple:
    """(V1, V2): the enumeration part (high girth, looped) and the rest."""
    v1 = sorted(g3.rn_nodes)
    v2 = sorted(set(range(g3.graph.n)) - set(v1))
    return v1, v2


def v2_decomposition(g3: GadgetGraph) -> TreeDecomposition:
    """Decomposition of G3[V2] in original node ids (min-fill-in heuristic)."""
    v1, v2 = nice_partition(g3)
    sub, remap = g3.graph.induced(v2)
    inv = {new: old for old, new in remap.items()}
    t = heuristic_decomposition(sub)
    return TreeDecomposition({i: {inv[v] for v in bag} for i, bag in t.bags.items()}, t.tree_edges)


# -- local analysis of one coupling gadget --------------------------------------------

# Boundary modes: which of the four boundary edges x->a, u->b, a->y, b->v are used.
LOCAL_MODES = {
    "both": ("xa", "ub", "ay", "bv"),
    "neither": (),
    "only_xy": ("xa", "ay"),
    "only_uv": ("ub", "bv"),
    "cross_xv": ("xa", "bv"),
    "cross_uy": ("ub", "ay"),
}


def standalone_gadget(fault=None):
    """Gadget nodes a..e (0..4) plus an outside node 5 standing for x, y, u, v."""
    g = WeightedDigraph(6)
    a, b, c, d, e, out = range(6)
    a_w = -1 if fault == "ay" else -2
    c_w = 1 if fault == "cloop" else -1
    names = {
        "xa": g.add_edge(out, a, 1), "ub": g.add_edge(out, b, 1),
        "ay": g.add_edge(a, out, a_w), "bv": g.add_edge(b, out, 1),
        "ad": g.add_edge(a, d, 1), "db": g.add_edge(d, b, 1),
        "be": g.add_edge(b, e, 1), "ea": g.add_edge(e, a, 1),
        "ac": g.add_edge(a, c, 1), "ca": g.add_edge(c, a, 1),
        "bc": g.add_edge(b, c, 1), "cb": g.add_edge(c, b, 1),
    }
    for v in (a, b, d, e):
        names[f"loop_{'abcde'[v]}"] = g.add_edge(v, v, 1)
    names["loop_c"] = g.add_edge(c, c, c_w)
    return g, names


def local_covers(mode: str, fault=None) -> list:
    """Edge sets where a..e each have one in- and one out-edge and the boundary use is ``mode``."""
    g, names = standalone_gadget(fault)
    boundary = {names[k] for k in ("xa", "ub", "ay", "bv")}
    forced = {names[k] for k in LOCAL_MODES[mode]}
    inner = [e for e in g.edge_list() if e.id not in boundary]
    found = []
    for r in range(len(inner) + 1):
        if r > 5:
            break
        for sel in itertools.combinations(inner, r):
            ids = {e.id for e in sel} | forced
            outdeg = [0] * 5
            indeg = [0] * 5
            for eid in ids:
                e = g.edges[eid]
                if e.src < 5:
                    outdeg[e.src] += 1
                if e.dst < 5:
                    indeg[e.dst] += 1
            if all(x == 1 for x in outdeg) and all(x == 1 for x in indeg):
                found.append((frozenset(ids), g.weight_of(ids).constant_value()))
    return found


@dataclass
class LocalReport:
    counts: dict
    totals: dict

    @property
    def ok(self) -> bool:
        expect_tot = {"both": 2, "neither": 2, "only_xy": 0, "only_uv": 0, "cross_xv": 0, "cross_uy": 0}
        expect_cnt = {"both": 1, "neither": 6, "only_xy": 2, "only_uv": 2, "cross_xv": 2, "cross_uy": 2}
        return self.totals == expect_tot and self.counts == expect_cnt

    @property
    def total_covers(self) -> int:
        return sum(self.counts.values())


def iff_gadget_local_check(fault=None) -> LocalReport:
    counts, totals = {}, {}
    for mode in LOCAL_MODES:
        covers = local_covers(mode, fault)
        counts[mode] = len(covers)
        totals[mode] = sum(w for _, w in covers)
    return LocalReport(counts, totals)


# -- the full identity ----------------------------------------------------------------

@dataclass
class HardnessInstance:
    formula: Circuit
    y_vars: list
    k: int
    ordered: bool = False
    fault: str | None = None
    g1: GadgetGraph | None = None
    g2: GadgetGraph | None = None
    g3: GadgetGraph | None = None

    @property
    def x_vars(self) -> list:
        return sorted(v for v in self.formula.variables() if v.ns != Y_NS)

    @property
    def n(self) -> int:
        return len(self.y_vars)

    @property
    def M(self) -> int:
        return self.g3.M if self.g3 is not None else None


def build_instance(f: Circuit, y_vars, k: int, ordered: bool = False,
                   fault: str | None = None) -> HardnessInstance:
    f = prepare_formula(f)
    g1 = compile_G1(f)
    g2 = compile_G2(g1, y_vars)
    g3 = (compile_G3_ordered if ordered else compile_G3)(g2, inject_fault=fault)
    return HardnessInstance(f, list(y_vars), k, ordered, fault, g1, g2, g3)


def default_y_vars(f: Circuit, n: int | None = None) -> list:
    used = sorted(v.idx[0] for v in f.variables() if v.ns == Y_NS)
    n = n if n is not None else (max(used) if used else 0)
    return [var(Y_NS, i) for i in range(1, n + 1)]


@dataclass
class HardnessReport:
    k: int
    n: int
    M: int
    ordered: bool
    cycle_length: int
    lhs: Poly
    weighted_sum: Poly
    stated_factor: int
    cyclic_factor: int
    nodes: int
    edges: int

    @property
    def rhs(self) -> Poly:
        return self.weighted_sum * (self.stated_factor * 2 ** self.M)

    @property
    def rhs_cyclic(self) -> Poly:
        return self.weighted_sum * (self.cyclic_factor * 2 ** self.M)

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs

    @property
    def holds_cyclic(self) -> bool:
        return self.lhs == self.rhs_cyclic

    def summary(self) -> str:
        return (f"k={self.k} n={self.n} M={self.M} ordered={self.ordered} cycle={self.cycle_length} "
                f"nodes={self.nodes} edges={self.edges} lhs_terms={len(self.lhs)} "
                f"rhs_terms={len(self.rhs)} stated={'pass' if self.holds else 'FAIL'} "
                f"cyclic={'pass' if self.holds_cyclic else 'FAIL'}")


def cyclic_order_count(k: int, ordered: bool) -> int:
    """Directed cycles in the enumeration part through a fixed set of k y-edges."""
    if k < 2:
        return 0
    return 1 if ordered else math.factorial(k - 1)


def verify_hardness_identity(inst: HardnessInstance, budget: int = 10**7) -> HardnessReport:
    """LHS: restricted permanent of G3.  RHS: k! 2^M sum_{|e|=k} F(X, e).

    The report also carries the right-hand side with the number of directed
    cycles through k fixed y-edges, (k-1)! (1 when ordered), in place of k!.
    """
    g3 = inst.g3
    L = long_cycle_length(g3, inst.k)
    lhs = restricted_permanent(g3.graph, L, 4, budget=budget)
    spec = SumSpec(inst.formula, inst.y_vars, inst.k)
    ws = weighted_sum_bruteforce(spec)
    stated = 1 if inst.ordered else math.factorial(inst.k)
    return HardnessReport(inst.k, inst.n, g3.M, inst.ordered, L, lhs, ws, stated,
                          cyclic_order_count(inst.k, inst.ordered), g3.graph.n, len(g3.graph.edges))


def g1_parse_tree_check(f: Circuit) -> dict:
    """Consistent covers of G1 against parse trees of ``f`` (both as weight multisets)."""
    from .circuit import parse_trees
    from .graph import consistent_covers

    g1 = compile_G1(f)
    covers = consistent_covers(g1.graph, g1.couplings)
    cover_w = sorted(str(cv.weight(g1.graph)) for cv in covers)
    trees = parse_trees(f)
    tree_w = sorted(str(t.monomial) for t in trees)
    max_cycle = max((max(cv.lengths()) for cv in covers), default=0)
    return {"ok": cover_w == tree_w and max_cycle <= 2, "covers": len(covers), "trees": len(trees),
            "max_cycle": max_cycle}
