"""Batch command-line front end.

Exit codes: 0 all assertions pass, 1 an assertion failed, 2 input error,
3 budget exceeded.  stdout carries only the report; artifacts go to files.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from importlib import resources
from pathlib import Path

from . import suite
from .circuit import Circuit, circuit_eval_poly, depth, formal_degree, parse_expr
from .errors import BudgetExceeded, RPermError
from .expsum import SumSpec, split_reduction, verify_split_identity
from .gadgets import (build_instance, compile_G1, compile_G2, compile_G3, compile_G3_ordered,
                      default_y_vars, parse_fault, prepare_formula, verify_hardness_identity)
from .graph import WeightedDigraph, couplings_to_text, per_le_c
from .suite import Row, RunReport, digest
from .treedec import TreeDecomposition, make_nice
from .twdp import DPStats, dp_per_le_c

BUDGET_ENV = "RPERM_BUDGET"
EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3
BRUTE_FORCE_MAX_NODES = 12


class InputError(Exception):
    pass


def bundled(name: str) -> Path:
    return Path(str(resources.files("rperm") / "data" / name))


def read_input(path: str) -> str:
    """File contents; ``bundled:NAME`` reads from the shipped example data."""
    p = bundled(path.split(":", 1)[1]) if path.startswith("bundled:") else Path(path)
    try:
        return p.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def load_formula(path: str) -> Circuit:
    text = read_input(path)
    if text.lstrip().startswith("CIRCUIT"):
        return Circuit.from_text(text)
    return parse_expr(text)


def _write(out_dir: Path, name: str, text: str) -> str:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    return str(path)


# -- commands ---------------------------------------------------------------------------

def cmd_verify_hardness(args) -> RunReport:
    f = load_formula(args.formula)
    y_vars = default_y_vars(f, args.n)
    inst = build_instance(f, y_vars, args.k, ordered=args.ordered, fault=args.inject_fault)
    rep = verify_hardness_identity(inst, budget=args.budget)
    holds = rep.holds_cyclic if args.factor == "cyclic" else rep.holds
    factor = rep.cyclic_factor if args.factor == "cyclic" else rep.stated_factor
    rows = [Row(1, "identity", holds,
                f"lhs={rep.lhs} rhs={factor}*2^{rep.M}*({rep.weighted_sum})"),
            Row(2, "details", True, rep.summary())]
    arts = [_write(args.out_dir, "g3.graph", inst.g3.graph.to_text()),
            _write(args.out_dir, "g3.provenance", inst.g3.provenance_text())]
    return RunReport("verify-hardness", digest(f.to_text(), args.n, args.k, args.ordered,
                                               args.inject_fault, args.factor), rows, artifacts=arts)


def cmd_gadget_compile(args) -> RunReport:
    f = prepare_formula(load_formula(args.formula))
    gg = compile_G1(f)
    if args.stage != "g1":
        gg = compile_G2(gg, default_y_vars(f, args.n))
    if args.stage == "g3":
        gg = compile_G3(gg, inject_fault=args.inject_fault)
    elif args.stage == "g3-ordered":
        gg = compile_G3_ordered(gg, inject_fault=args.inject_fault)
    problems = gg.check()
    rows = [Row(1, "structure", not problems, "; ".join(problems) or
                f"nodes={gg.graph.n} edges={len(gg.graph.edges)} M={gg.M}")]
    stem = args.stage
    arts = [_write(args.out_dir, f"{stem}.graph", gg.graph.to_text()),
            _write(args.out_dir, f"{stem}.provenance", gg.provenance_text()),
            _write(args.out_dir, f"{stem}.couplings", couplings_to_text(gg.couplings))]
    return RunReport(f"gadget compile --stage {args.stage}",
                     digest(f.to_text(), args.stage, args.n, args.inject_fault), rows, artifacts=arts)


def cmd_dp(args) -> RunReport:
    g = WeightedDigraph.from_text(read_input(args.graph))
    td = TreeDecomposition.from_text(read_input(args.decomposition))
    nt = make_nice(td)
    stats = DPStats()
    circ = dp_per_le_c(g, nt, args.c, budget=args.budget, stats=stats)
    rows = [Row(1, "circuit", True, f"width={td.width} nice_height={nt.height} gates={circ.size} "
                                    f"depth={depth(circ)} degree={formal_degree(circ)}")]
    if g.n <= BRUTE_FORCE_MAX_NODES:
        same = circuit_eval_poly(circ) == per_le_c(g, args.c, budget=args.budget)
        rows.append(Row(2, "brute force", same, "equal" if same else "circuit differs from enumeration"))
    else:
        rows.append(Row(2, "brute force", True, f"skipped, more than {BRUTE_FORCE_MAX_NODES} nodes"))
    arts = [_write(args.out_dir, "per_le_c.circuit", circ.to_text())]
    return RunReport("dp", digest(g.to_text(), td.to_text(), args.c), rows, artifacts=arts)


def cmd_verify_split(args) -> RunReport:
    f = load_formula(args.formula)
    ys = default_y_vars(f, args.n)
    s = SumSpec(f, ys)
    r = split_reduction(s, args.blocks)
    res = verify_split_identity(s, r)
    rows = [Row(1, "split identity", res["ok"],
                f"blocks={res['k']} b={res['b']} weft {res['weft_g']} -> {res['weft_G']}")]
    arts = [_write(args.out_dir, "split.txt", r.dump()),
            _write(args.out_dir, "split_G.circuit", r.G.to_text())]
    return RunReport("expsum verify-split", digest(f.to_text(), args.n, args.blocks), rows, artifacts=arts)


def cmd_classics(args) -> RunReport:
    from . import classics
    from .graph import complete_digraph, matrix_of, permanent_bruteforce

    n = args.n
    arts: list = []
    if args.which == "ryser":
        f = classics.ryser_formula(n)
        ok = circuit_eval_poly(f) == permanent_bruteforce(matrix_of(complete_digraph(n)))
        rows = [Row(1, "ryser", ok, f"size={f.size} bound={8 * 2 ** n * n * n}")]
        arts.append(_write(args.out_dir, f"ryser{n}.circuit", f.to_text()))
    elif args.which == "esp":
        c = classics.esp_circuit(n, args.k)
        rows = [Row(1, "esp", True, f"gates={c.size}")]
        arts.append(_write(args.out_dir, f"esp{n}_{args.k}.circuit", c.to_text()))
    elif args.which == "bnk":
        c = classics.indicator_Bnk(n, args.k)
        rows = [Row(1, "indicator", True, f"gates={c.size} constant_free={c.constant_free}")]
        arts.append(_write(args.out_dir, f"B{n}_{args.k}.circuit", c.to_text()))
    elif args.which == "pochhammer":
        p, c = classics.pochhammer(n)
        rows = [Row(1, "pochhammer", circuit_eval_poly(c) == p, f"gates={c.size}")]
        arts.append(_write(args.out_dir, f"pochhammer{n}.circuit", c.to_text()))
    elif args.which == "bitpack":
        r = classics.bitpack_identity(n)
        rows = [Row(1, "bitpack", r.ok and r.no_overlap, f"bits={r.bits}")]
    else:
        xpow, two = classics.power_tower_circuits(n)
        rows = [Row(1, "towers", circuit_eval_poly(two).constant_value() == 2 ** (2 ** n),
                    f"gates={xpow.size},{two.size}")]
    return RunReport(f"classics {args.which}", digest(args.which, n, args.k), rows, artifacts=arts)


def cmd_suite(args) -> RunReport:
    only = [int(x) for x in args.only.split(",")] if args.only else None
    return suite.run_suite(args.seed, args.sizes, args.budget, only)


# -- parser -----------------------------------------------------------------------------

def _budget_default() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return suite.DEFAULT_BUDGET
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=suite.DEFAULT_SEED)
    common.add_argument("--budget", type=int, default=None,
                        help=f"enumeration budget (default from ${BUDGET_ENV} or {suite.DEFAULT_BUDGET})")
    common.add_argument("--out-dir", type=Path, default=Path("rperm-out"))
    common.add_argument("--inject-fault", default=None, metavar="SPEC",
                        help="corrupt one gadget weight: ay:IDX (-2 -> -1) or cloop:IDX (-1 -> +1)")

    p = argparse.ArgumentParser(prog="rperm", description="Restricted permanents, gadgets and exponential sums.")
    sub = p.add_subparsers(dest="command", required=True)

    vh = sub.add_parser("verify-hardness", parents=[common], help="check the gadget identity for a formula")
    vh.add_argument("formula", help="expression or CIRCUIT file (bundled:NAME for shipped data)")
    vh.add_argument("--n", type=int, default=None, help="number of Y variables (default: largest used)")
    vh.add_argument("--k", type=int, required=True)
    vh.add_argument("--ordered", action="store_true")
    vh.add_argument("--factor", choices=["stated", "cyclic"], default="stated",
                    help="stated: k! (1 when ordered); cyclic: number of directed k-cycles")
    vh.set_defaults(func=cmd_verify_hardness)

    gd = sub.add_parser("gadget", help="gadget compilation")
    gsub = gd.add_subparsers(dest="gadget_cmd", required=True)
    gc = gsub.add_parser("compile", parents=[common])
    gc.add_argument("formula")
    gc.add_argument("--stage", choices=["g1", "g2", "g3", "g3-ordered"], required=True)
    gc.add_argument("--n", type=int, default=None)
    gc.set_defaults(func=cmd_gadget_compile)

    dp = sub.add_parser("dp", parents=[common], help="per<=c circuit from a tree decomposition")
    dp.add_argument("graph")
    dp.add_argument("decomposition")
    dp.add_argument("c", type=int)
    dp.set_defaults(func=cmd_dp)

    ex = sub.add_parser("expsum", help="exponential sums")
    esub = ex.add_subparsers(dest="expsum_cmd", required=True)
    vs = esub.add_parser("verify-split", parents=[common])
    vs.add_argument("formula")
    vs.add_argument("--n", type=int, default=None)
    vs.add_argument("--blocks", type=int, required=True, help="block size")
    vs.set_defaults(func=cmd_verify_split)

    cl = sub.add_parser("classics", parents=[common], help="classical circuits")
    cl.add_argument("which", choices=["ryser", "esp", "bnk", "pochhammer", "bitpack", "towers"])
    cl.add_argument("--n", type=int, default=4)
    cl.add_argument("--k", type=int, default=2)
    cl.set_defaults(func=cmd_classics)

    st = sub.add_parser("suite", parents=[common], help="run the acceptance matrix")
    st.add_argument("--sizes", choices=["default", "small"], default="default")
    st.add_argument("--only", default=None, help="comma-separated criterion numbers")
    st.set_defaults(func=cmd_suite)
    return p


def main(argv: list | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.budget is None:
            args.budget = _budget_default()
        if args.inject_fault is not None:
            parse_fault(args.inject_fault)
        t0 = time.perf_counter()
        report = args.func(args)
        elapsed = time.perf_counter() - t0
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}")
        return EXIT_BUDGET
    except (InputError, RPermError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = report.to_text()
    sys.stdout.write(text)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    (args.out_dir / "report.txt").write_text(text)
    (args.out_dir / "timings.txt").write_text(report.timings_text() + f"total {elapsed:.3f}\n")
    return report.exit_code()


if __name__ == "__main__":
    sys.exit(main())
