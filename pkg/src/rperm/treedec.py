"""Tree decompositions: validation, exact small-graph treewidth, nice form."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx
from networkx.algorithms.approximation import treewidth_min_fill_in

from .errors import BudgetExceeded, InvalidDecomposition, ParseError

LEAF, INTRODUCE, FORGET, JOIN = "leaf", "introduce", "forget", "join"


@dataclass
class TreeDecomposition:
    bags: dict
    tree_edges: list

    def __post_init__(self):
        self.bags = {i: frozenset(b) for i, b in self.bags.items()}
        self.tree_edges = [tuple(e) for e in self.tree_edges]

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1

    def to_text(self) -> str:
        lines = [f"TREEDEC {len(self.bags)}"]
        for i in sorted(self.bags):
            lines.append(f"BAG {i}: " + " ".join(map(str, sorted(self.bags[i]))))
        for a, b in self.tree_edges:
            lines.append(f"EDGE {a} {b}")
        return "\n".join(ln.rstrip() for ln in lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TreeDecomposition":
        bags, edges = {}, []
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("TREEDEC"):
            raise ParseError("expected TREEDEC header")
        try:
            for ln in lines[1:]:
                if ln.startswith("BAG"):
                    head, _, rest = ln.partition(":")
                    bags[int(head.split()[1])] = frozenset(int(x) for x in rest.split())
                elif ln.startswith("EDGE"):
                    _, a, b = ln.split()
                    edges.append((int(a), int(b)))
                else:
                    raise ParseError(f"bad line {ln!r}")
        except ValueError as exc:
            raise ParseError(str(exc)) from None
        return cls(bags, edges)


@dataclass
class DecompositionReport:
    covers_vertices: bool
    covers_edges: bool
    connected: bool
    is_tree: bool
    width: int
    problems: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.covers_vertices and self.covers_edges and self.connected and self.is_tree


def _as_undirected(g) -> nx.Graph:
    if isinstance(g, nx.Graph):
        u = nx.Graph(g)
        u.remove_edges_from(list(nx.selfloop_edges(u)))
        return u
    return g.undirected()


def validate_decomposition(g, t: TreeDecomposition) -> DecompositionReport:
    """Check the three tree-decomposition conditions against ``g``'s underlying graph."""
    u = _as_undirected(g)
    problems = []
    tree = nx.Graph()
    tree.add_nodes_from(t.bags)
    tree.add_edges_from(t.tree_edges)
    is_tree = len(t.bags) > 0 and nx.is_tree(tree) and set(tree.nodes) == set(t.bags)
    if not is_tree:
        problems.append("bag graph is not a tree")
    covered = set().union(*t.bags.values()) if t.bags else set()
    missing_v = set(u.nodes) - covered
    if missing_v:
        problems.append(f"vertices in no bag: {sorted(missing_v)}")
    missing_e = [(a, b) for a, b in u.edges if not any(a in bag and b in bag for bag in t.bags.values())]
    if missing_e:
        problems.append(f"edges in no bag: {sorted(missing_e)}")
    disconnected = []
    for v in u.nodes:
        holders = [i for i, bag in t.bags.items() if v in bag]
        if holders and is_tree and not nx.is_connected(tree.subgraph(holders)):
            disconnected.append(v)
    if disconnected:
        problems.append(f"bags containing these vertices are not connected: {disconnected}")
    return DecompositionReport(not missing_v, not missing_e, not disconnected, is_tree, t.width, problems)


# -- exact treewidth -----------------------------------------------------------------

def _q_size(adj: list, rest: int, v: int) -> int:
    """|Q(rest, v)|: vertices outside rest+v reachable from v through rest."""
    seen = 1 << v
    stack = [v]
    found = 0
    while stack:
        x = stack.pop()
        for w in adj[x]:
            if (seen >> w) & 1:
                continue
            seen |= 1 << w
            if (rest >> w) & 1:
                stack.append(w)
            else:
                found += 1
    return found


def naive_treewidth(g, max_nodes: int = 16) -> tuple:
    """Optimal width and a decomposition, by DP over vertex subsets.

    TW(S) = min over v in S of max(TW(S - v), |Q(S - v, v)|), where the
    vertices of S are eliminated before the rest.
    """
    u = _as_undirected(g)
    nodes = sorted(u.nodes)
    n = len(nodes)
    if n > max_nodes:
        raise BudgetExceeded(f"{n} vertices exceed exact-treewidth limit {max_nodes}")
    if n == 0:
        return -1, TreeDecomposition({0: frozenset()}, [])
    index = {v: i for i, v in enumerate(nodes)}
    adj = [[index[w] for w in u.neighbors(v)] for v in nodes]
    tw = {0: -1}
    choice = {}
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            s = 0
            for i in combo:
                s |= 1 << i
            best, arg = None, None
            for i in combo:
                rest = s & ~(1 << i)
                val = max(tw[rest], _q_size(adj, rest, i))
                if best is None or val < best:
                    best, arg = val, i
            tw[s] = best
            choice[s] = arg
    order = []
    s = (1 << n) - 1
    while s:
        v = choice[s]
        order.append(v)
        s &= ~(1 << v)
    order.reverse()
    dec = decomposition_from_order(u, [nodes[i] for i in order])
    return tw[(1 << n) - 1], dec


def elimination_width(g, order) -> int:
    """Width of the elimination ordering (max later-neighbour count in the fill graph)."""
    u = _as_undirected(g).copy()
    width = -1
    for v in order:
        nbrs = list(u.neighbors(v))
        width = max(width, len(nbrs))
        for a, b in itertools.combinations(nbrs, 2):
            u.add_edge(a, b)
        u.remove_node(v)
    return width


def decomposition_from_order(g, order) -> TreeDecomposition:
    u = _as_undirected(g).copy()
    pos = {v: i for i, v in enumerate(order)}
    bags, later = {}, {}
    for v in order:
        nbrs = set(u.neighbors(v))
        bags[v] = frozenset(nbrs | {v})
        later[v] = nbrs
        for a, b in itertools.combinations(nbrs, 2):
            u.add_edge(a, b)
        u.remove_node(v)
    edges = []
    roots = []
    for v in order:
        if later[v]:
            parent = min(later[v], key=pos.__getitem__)
            edges.append((pos[v], pos[parent]))
        else:
            roots.append(pos[v])
    for a, b in zip(roots, roots[1:]):
        edges.append((a, b))
    return TreeDecomposition({pos[v]: bags[v] for v in order}, edges)


def heuristic_decomposition(g) -> TreeDecomposition:
    """Min-fill-in decomposition for graphs too large for the exact search."""
    u = _as_undirected(g)
    if u.number_of_nodes() == 0:
        return TreeDecomposition({0: frozenset()}, [])
    _, tree = treewidth_min_fill_in(u)
    ids = {bag: i for i, bag in enumerate(sorted(tree.nodes, key=lambda b: sorted(b)))}
    return TreeDecomposition({i: bag for bag, i in ids.items()},
                             [(ids[a], ids[b]) for a, b in tree.edges])


# -- nice decompositions -------------------------------------------------------------

@dataclass
class NiceNode:
    kind: str
    bag: frozenset
    children: tuple = ()
    vertex: int | None = None


@dataclass
class NiceTreeDecomposition:
    """Nodes in children-first order; the last node is the root (empty bag)."""

    nodes: list
    root: int

    @property
    def width(self) -> int:
        return max(len(nd.bag) for nd in self.nodes) - 1

    @property
    def height(self) -> int:
        h = [0] * len(self.nodes)
        for i, nd in enumerate(self.nodes):
            if nd.children:
                h[i] = 1 + max(h[c] for c in nd.children)
        return h[self.root]

    def check(self) -> list:
        problems = []
        for i, nd in enumerate(self.nodes):
            kids = [self.nodes[c] for c in nd.children]
            if any(c >= i for c in nd.children):
                problems.append(f"node {i}: child after parent")
            if nd.kind == LEAF and (nd.children or nd.bag):
                problems.append(f"node {i}: leaf must be childless with empty bag")
            elif nd.kind == INTRODUCE and not (len(kids) == 1 and nd.vertex not in kids[0].bag
                                               and nd.bag == kids[0].bag | {nd.vertex}):
                problems.append(f"node {i}: bad introduce")
            elif nd.kind == FORGET and not (len(kids) == 1 and nd.vertex in kids[0].bag
                                            and nd.bag == kids[0].bag - {nd.vertex}):
                problems.append(f"node {i}: bad forget")
            elif nd.kind == JOIN and not (len(kids) == 2 and all(k.bag == nd.bag for k in kids)):
                problems.append(f"node {i}: bad join")
        if self.nodes[self.root].bag:
            problems.append("root bag is not empty")
        return problems

    def as_decomposition(self) -> TreeDecomposition:
        edges = [(i, c) for i, nd in enumerate(self.nodes) for c in nd.children]
        return TreeDecomposition({i: nd.bag for i, nd in enumerate(self.nodes)}, edges)


def make_nice(t: TreeDecomposition, root=None) -> NiceTreeDecomposition:
    """Standard conversion: chains of forget/introduce between bags, binary joins.

    Keeps the input tree's shape (no rebalancing), so the height follows it.
    """
    if not t.bags:
        raise InvalidDecomposition("empty decomposition")
    tree = nx.Graph()
    tree.add_nodes_from(t.bags)
    tree.add_edges_from(t.tree_edges)
    if not nx.is_tree(tree):
        raise InvalidDecomposition("bag graph is not a tree")
    if root is None:
        root = min(t.bags)
    nodes: list = []

    def push(kind, bag, children=(), vertex=None) -> int:
        nodes.append(NiceNode(kind, frozenset(bag), tuple(children), vertex))
        return len(nodes) - 1

    def morph(nid: int, target: frozenset) -> int:
        bag = nodes[nid].bag
        for v in sorted(bag - target):
            bag = bag - {v}
            nid = push(FORGET, bag, (nid,), v)
        for v in sorted(target - bag):
            bag = bag | {v}
            nid = push(INTRODUCE, bag, (nid,), v)
        return nid

    def build(x, parent) -> int:
        target = t.bags[x]
        subs = [morph(build(y, x), target) for y in sorted(tree.neighbors(x), key=repr) if y != parent]
        if not subs:
            return morph(push(LEAF, ()), target)
        while len(subs) > 1:
            merged = []
            for a, b in zip(subs[::2], subs[1::2]):
                merged.append(push(JOIN, target, (a, b)))
            if len(subs) % 2:
                merged.append(subs[-1])
            subs = merged
        return subs[0]

    import sys
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10 * len(t.bags) + 200))
    try:
        top = morph(build(root, None), frozenset())
    finally:
        sys.setrecursionlimit(old)
    return NiceTreeDecomposition(nodes, top)
