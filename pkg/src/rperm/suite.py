"""The acceptance matrix: one function per criterion, each returning a Row.

Rows carry no timings, so a report is byte-identical across runs with the
same seed; timings are kept separately.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import random
import time
from dataclasses import dataclass, field

from .algebra import Poly, var
from .circuit import circuit_eval_poly, parse_expr, parse_trees
from .classics import bitpack_identity, indicator_Bnk, ryser_formula
from .circuit import circuit_eval_point
from .errors import BudgetExceeded
from .expsum import SumSpec, split_reduction, verify_split_identity
from .gadgets import (build_instance, g1_parse_tree_check, iff_gadget_local_check, nice_partition,
                      long_cycle_length, v2_decomposition, verify_hardness_identity)
from .graph import (LengthFilter, WeightedDigraph, build_Rn, complete_digraph, enumerate_covers,
                    matching_polynomial_bruteforce, matchings_via_22perm, matrix_of,
                    permanent_bruteforce, per_le_c, restricted_permanent, validate_nice)
from .randgen import random_circuit, random_ktree_digraph, random_layered_formula
from .treedec import TreeDecomposition, make_nice
from .twdp import dp_per_le_c, membership_polynomial

DEFAULT_SEED = 20240601
DEFAULT_BUDGET = 10**7


@dataclass
class Row:
    number: int
    name: str
    ok: bool
    detail: str
    seconds: float = field(default=0.0, compare=False)

    def line(self) -> str:
        return f"criterion {self.number:2d} {self.name:<22} {'PASS' if self.ok else 'FAIL'}  {self.detail}"


@dataclass
class RunReport:
    command: str
    inputs_digest: str
    rows: list
    budget_exceeded: bool = False
    artifacts: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows) and not self.budget_exceeded

    def exit_code(self) -> int:
        if self.budget_exceeded:
            return 3
        return 0 if self.ok else 1

    def to_text(self) -> str:
        lines = [f"command: {self.command}", f"inputs: {self.inputs_digest}"]
        lines += [r.line() for r in self.rows]
        for path in self.artifacts:
            lines.append(f"artifact: {path}")
        passed = sum(r.ok for r in self.rows)
        lines.append(f"result: {passed}/{len(self.rows)} passed" + (" (budget exceeded)" if self.budget_exceeded else ""))
        return "\n".join(lines) + "\n"

    def timings_text(self) -> str:
        return "".join(f"{r.number} {r.name} {r.seconds:.3f}\n" for r in self.rows)


def digest(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(repr(p).encode())
        h.update(b"\0")
    return h.hexdigest()[:16]


# -- shared instance sets -------------------------------------------------------------

BUNDLED_FORMULAS = [
    ("Y1*Y2", 2, 2),
    ("X1*Y1 + X2*Y2", 2, 2),
    ("X1*Y1 + Y2*Y3", 3, 2),
    ("(X1 + Y1)*Y2", 2, 2),
    ("X1*Y1*Y2 + X2*Y3", 3, 2),
    ("Y1 + Y2 + Y3", 3, 2),
    ("X1*(Y1 + Y3) + 2", 3, 2),
    ("Y1*Y2*Y3 + X1", 3, 2),
    ("Y1", 1, 1),
    ("X1*Y1 + X2*Y2", 2, 1),
]


def hardness_instances(rng: random.Random, count: int = 12) -> list:
    """Bundled formulas plus random ones; every formula is layered with at most 10 gates."""
    out = []
    for text, n, k in BUNDLED_FORMULAS:
        out.append((text, parse_expr(text), n, k))
    leaves_x = [var("X", i) for i in (1, 2)]
    while len(out) < count:
        n = rng.choice([2, 3])
        leaves = leaves_x + [var("Y", i) for i in range(1, n + 1)]
        f = random_layered_formula(rng, leaves, 10, max_depth=3, consts=(1, -1))
        out.append((f"random#{len(out)}", f, n, 2))
    return out


def _ys(n: int) -> list:
    return [var("Y", i) for i in range(1, n + 1)]


# -- criteria ---------------------------------------------------------------------------

def crit_hardness(rng, budget, count=12, ordered=False) -> Row:
    insts = hardness_instances(rng, count)
    stated = cyclic = 0
    failing = []
    for name, f, n, k in insts:
        inst = build_instance(f, _ys(n), k, ordered=ordered)
        assert inst.formula.size <= 10
        r = verify_hardness_identity(inst, budget=budget)
        stated += r.holds
        cyclic += r.holds_cyclic
        if not r.holds:
            failing.append(f"{name}: lhs={r.lhs} rhs={r.rhs}")
    label = "without k!" if ordered else "with k!"
    detail = f"{stated}/{len(insts)} instances satisfy the identity {label}"
    if not ordered:
        detail += (f"; {cyclic}/{len(insts)} satisfy it with the directed cycle count"
                   " ((k-1)! for k>=2, 0 for k=1) in place of k!")
    if failing:
        detail += f"; first failure {failing[0]}"
    return Row(2 if ordered else 1, "ordered variant" if ordered else "hardness identity",
               stated == len(insts), detail)


def crit_local_gadget(rng, budget) -> Row:
    rep = iff_gadget_local_check()
    detail = (f"totals {[rep.totals[m] for m in rep.totals]} counts {[rep.counts[m] for m in rep.counts]} "
              f"total covers {rep.total_covers}")
    return Row(3, "iff-gadget table", rep.ok and rep.total_covers == 15, detail)


def crit_parse_trees(rng, budget, count=50) -> Row:
    leaves = [var("X", i) for i in (1, 2, 3)]
    good = 0
    for _ in range(count):
        f = random_layered_formula(rng, leaves, 12, max_depth=3)
        res = g1_parse_tree_check(f)
        trees = parse_trees(f)
        sum_ok = sum((t.monomial for t in trees), Poly.const(0)) == circuit_eval_poly(f)
        good += res["ok"] and sum_ok
    return Row(4, "parse-tree bijection", good == count, f"{good}/{count} formulas biject")


def rn_cover_counts(n: int, k: int, budget: int = DEFAULT_BUDGET) -> dict:
    """For each k-set of y-edges, the number of (2k,1)-restricted covers whose y-edges are exactly that set."""
    rn = build_Rn(n)
    covers = enumerate_covers(rn.graph, LengthFilter(c=1, k=2 * k), budget=budget)
    counts = {sel: 0 for sel in itertools.combinations(range(n), k)}
    for cv in covers:
        ids = cv.edge_ids
        sel = tuple(i for i, e in enumerate(rn.y_edges) if e in ids)
        if sel in counts:
            counts[sel] += 1
    return counts


def crit_rn_counting(rng, budget) -> Row:
    bad = []
    seen = {}
    for n in range(1, 5):
        for k in range(1, n + 1):
            counts = rn_cover_counts(n, k, budget)
            vals = set(counts.values())
            seen[(n, k)] = sorted(vals)
            if vals != {math.factorial(k)}:
                bad.append((n, k))
    by_k = {}
    for (n, k), vals in seen.items():
        by_k.setdefault(k, set()).update(vals)
    detail = "covers per k-set by k: " + ", ".join(f"k={k}:{sorted(v)} (k!={math.factorial(k)})"
                                                    for k, v in sorted(by_k.items()))
    return Row(5, "R_n counting", not bad, detail)


def crit_treewidth_dp(rng, budget, count=50) -> Row:
    good = 0
    for i in range(count):
        n = rng.randint(1, 9)
        width = rng.randint(1, 4)
        c = rng.randint(1, 4)
        rg = random_ktree_digraph(rng, n, width)
        nt = make_nice(rg.decomposition)
        assert nt.width <= 4
        circ = dp_per_le_c(rg.graph, nt, c, budget=budget)
        good += circuit_eval_poly(circ) == per_le_c(rg.graph, c, budget=budget)
    return Row(6, "treewidth DP", good == count, f"{good}/{count} random digraphs match as polynomials")


def nice_instances(rng: random.Random, randoms: int = 4) -> list:
    """(name, graph, v1, v2, k, c, b, decomposition of V2 or None)."""
    out = []
    # directed 3-cycle in V1 plus an isolated looped V2 node
    g = WeightedDigraph(4)
    for i in range(3):
        g.add_edge(i, (i + 1) % 3, Poly.variable(var("X", i + 1, (i + 1) % 3 + 1)))
        g.add_edge(i, i, Poly.variable(var("X", i + 1, i + 1)))
    g.add_edge(3, 3, Poly.variable(var("X", 4, 4)))
    out.append(("triangle+isolated", g, [0, 1, 2], [3], 3, 2, 0, TreeDecomposition({0: {3}}, [])))
    tries = 0
    while len(out) < 1 + randoms:
        tries += 1
        inst = _random_nice(rng)
        if inst is not None:
            out.append((f"random#{len(out)}",) + inst)
        if tries > 5000:
            raise RuntimeError("could not sample nice instances")
    inst = build_instance(parse_expr("Y1*Y2 + X1*Y1"), _ys(2), 2)
    v1, v2 = nice_partition(inst.g3)
    out.append(("compiled G3", inst.g3.graph, v1, v2, long_cycle_length(inst.g3, 2), 4, 5,
                v2_decomposition(inst.g3)))
    return out


def _random_nice(rng: random.Random):
    c = rng.choice([2, 3])
    m1 = rng.randint(c + 1, c + 3)
    m2 = rng.randint(2, 5)
    rg = random_ktree_digraph(rng, m2, rng.randint(1, 2))
    g = WeightedDigraph(m1 + m2)
    w = lambda i, j: Poly.variable(var("X", i + 1, j + 1))  # noqa: E731
    # V1: a directed cycle (girth m1 > c) with a loop on every node
    for i in range(m1):
        g.add_edge(i, (i + 1) % m1, w(i, (i + 1) % m1))
        g.add_edge(i, i, w(i, i))
    for e in rg.graph.edge_list():
        g.add_edge(e.src + m1, e.dst + m1, w(e.src + m1, e.dst + m1))
    for _ in range(rng.randint(1, 4)):
        a, b = rng.randrange(m1), m1 + rng.randrange(m2)
        if rng.random() < 0.5:
            a, b = b, a
        if not g.find_edges(a, b):
            g.add_edge(a, b, w(a, b))
    v1, v2 = list(range(m1)), list(range(m1, m1 + m2))
    dec = TreeDecomposition({i: {v + m1 for v in bag} for i, bag in rg.decomposition.bags.items()},
                            rg.decomposition.tree_edges)
    if not validate_nice(g, v1, v2, c, 2, dec).valid:
        return None
    lengths = sorted({len(cv) for cv in _simple_cycle_lengths(g) if len(cv) > c})
    if not lengths:
        return None
    k = rng.choice(lengths)
    if restricted_permanent(g, k, c).is_zero():
        return None
    return g, v1, v2, k, c, 2, dec


def _simple_cycle_lengths(g: WeightedDigraph):
    import networkx as nx
    return nx.simple_cycles(g.to_networkx())


def crit_membership(rng, budget) -> Row:
    insts = nice_instances(rng)
    good, has_g3 = 0, False
    notes = []
    for name, g, v1, v2, k, c, b, dec in insts:
        rep = validate_nice(g, v1, v2, c, b, dec)
        lhs = membership_polynomial(g, v1, v2, k, c, dec)
        rhs = restricted_permanent(g, k, c, budget=budget)
        ok = rep.valid and lhs == rhs and not rhs.is_zero()
        good += ok
        if name == "compiled G3":
            has_g3 = ok
        if not ok:
            notes.append(f"{name}: nice={rep.valid} equal={lhs == rhs}")
    detail = f"{good}/{len(insts)} nice instances match (compiled G3 included: {has_g3})"
    if notes:
        detail += "; " + "; ".join(notes)
    return Row(7, "membership composition", good == len(insts) and good >= 5 and has_g3, detail)


def crit_indicator(rng, budget, nmax=12) -> Row:
    bad = 0
    for n in range(nmax + 1):
        ys = _ys(n)
        circs = [indicator_Bnk(n, k) for k in range(n + 1)]
        for pt in itertools.product((0, 1), repeat=n):
            a = dict(zip(ys, pt))
            w = sum(pt)
            for k, circ in enumerate(circs):
                bad += circuit_eval_point(circ, a) != (1 if w == k else 0)
    return Row(8, "indicator B_{n,k}", bad == 0, f"n<=12, all k, all points: {bad} mismatches")


def crit_split(rng, budget, count=20) -> Row:
    good = 0
    uneven = 0
    for i in range(count):
        ell, bs = rng.randint(1, 6), rng.randint(1, 3)
        if i < 3:  # make sure short last blocks appear
            ell, bs = [(5, 2), (4, 3), (5, 3)][i]
        ys = _ys(ell)
        xs = [var("X", 1), var("X", 2)]
        base = random_circuit(rng, xs + ys, rng.randint(len(xs + ys) + 2, len(xs + ys) + 6))
        s = SumSpec(base, ys)
        r = split_reduction(s, bs)
        uneven += ell % bs != 0
        res = verify_split_identity(s, r)
        good += res["ok"] and res["weft_G"] <= res["weft_g"] + 2
    return Row(9, "split reduction", good == count and uneven > 0,
               f"{good}/{count} identities hold ({uneven} with a short last block)")


def crit_ryser(rng, budget) -> Row:
    ok = True
    sizes = []
    for n in range(1, 6):
        f = ryser_formula(n)
        sizes.append(f.size)
        ok &= f.size <= 8 * 2 ** n * n * n
        ok &= circuit_eval_poly(f) == permanent_bruteforce(matrix_of(complete_digraph(n)))
    return Row(10, "Ryser formula", ok, f"n=1..5 symbolic equality, sizes {sizes}")


def crit_bitpack(rng, budget) -> Row:
    reps = [bitpack_identity(n) for n in range(1, 17)]
    ok = all(r.ok and r.no_overlap for r in reps)
    return Row(11, "bit-packing d(n)", ok, f"n=1..16 exact, d(16) has {reps[-1].bits} bits")


def crit_matchings(rng, budget) -> Row:
    ok = all(matchings_via_22perm(n, budget=budget) == matching_polynomial_bruteforce(n) for n in range(1, 7))
    return Row(12, "matching polynomial", ok, "n=1..6 equal to direct matching enumeration")


def crit_faults(rng, budget) -> Row:
    """Each fault must break the identity on some instance where it held without the fault."""
    broken = {}
    for fault_kind in ("ay", "cloop"):
        hits = 0
        for text, n, k in BUNDLED_FORMULAS:
            f = parse_expr(text)
            for ordered in (False, True):
                clean = verify_hardness_identity(build_instance(f, _ys(n), k, ordered), budget=budget)
                bad = verify_hardness_identity(build_instance(f, _ys(n), k, ordered, f"{fault_kind}:0"),
                                               budget=budget)
                if clean.holds_cyclic and not bad.holds_cyclic and not bad.holds:
                    hits += 1
        broken[fault_kind] = hits
    detail = ", ".join(f"{kind}: breaks {hits}/{2 * len(BUNDLED_FORMULAS)}" for kind, hits in broken.items())
    return Row(13, "fault sensitivity", all(h > 0 for h in broken.values()), detail)


CRITERIA = [
    (1, lambda rng, b, small: crit_hardness(rng, b, 10 if small else 12)),
    (2, lambda rng, b, small: crit_hardness(rng, b, 10 if small else 12, ordered=True)),
    (3, lambda rng, b, small: crit_local_gadget(rng, b)),
    (4, lambda rng, b, small: crit_parse_trees(rng, b, 10 if small else 50)),
    (5, lambda rng, b, small: crit_rn_counting(rng, b)),
    (6, lambda rng, b, small: crit_treewidth_dp(rng, b, 10 if small else 50)),
    (7, lambda rng, b, small: crit_membership(rng, b)),
    (8, lambda rng, b, small: crit_indicator(rng, b, 8 if small else 12)),
    (9, lambda rng, b, small: crit_split(rng, b, 5 if small else 20)),
    (10, lambda rng, b, small: crit_ryser(rng, b)),
    (11, lambda rng, b, small: crit_bitpack(rng, b)),
    (12, lambda rng, b, small: crit_matchings(rng, b)),
    (13, lambda rng, b, small: crit_faults(rng, b)),
]


NAMES = {1: "hardness identity", 2: "ordered variant", 3: "iff-gadget table", 4: "parse-tree bijection",
         5: "R_n counting", 6: "treewidth DP", 7: "membership composition", 8: "indicator B_{n,k}",
         9: "split reduction", 10: "Ryser formula", 11: "bit-packing d(n)", 12: "matching polynomial",
         13: "fault sensitivity"}


def run_criterion(number: int, seed: int = DEFAULT_SEED, budget: int = DEFAULT_BUDGET,
                  small: bool = False) -> Row:
    """One criterion with its own seeded stream, so rows replay independently."""
    fn = dict(CRITERIA)[number]
    rng = random.Random(f"{seed}:{number}")
    t0 = time.perf_counter()
    row = fn(rng, budget, small)
    row.seconds = time.perf_counter() - t0
    return row


def run_suite(seed: int = DEFAULT_SEED, sizes: str = "default", budget: int = DEFAULT_BUDGET,
              only: list | None = None) -> RunReport:
    small = sizes == "small"
    rows = []
    exceeded = False
    for number, _ in CRITERIA:
        if only and number not in only:
            continue
        try:
            rows.append(run_criterion(number, seed, budget, small))
        except BudgetExceeded as exc:
            exceeded = True
            rows.append(Row(number, NAMES[number], False, f"budget exceeded: {exc}"))
    return RunReport("suite", digest(seed, sizes, budget, only), rows, budget_exceeded=exceeded)
