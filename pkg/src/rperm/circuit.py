"""Algebraic circuits, formulas and Boolean circuits.

Gates are stored in topological order with dense integer ids (a gate's id is
its position).  Add and Mul gates take any number of children; fan-in one is
allowed and is what :func:`layer_formula` uses as padding.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .algebra import Poly, Var, mono_mul, var
from .errors import BudgetExceeded, MissingVariable, ParseError, TermBudgetExceeded

VAR, CONST, ADD, MUL = "var", "const", "add", "mul"


@dataclass(frozen=True)
class Gate:
    id: int
    kind: str
    var: Var | None = None
    value: int = 0
    children: tuple = ()

    @property
    def fanin(self) -> int:
        return len(self.children)

    def is_leaf(self) -> bool:
        return self.kind in (VAR, CONST)


@dataclass(frozen=True)
class Circuit:
    gates: tuple
    output: int
    constant_free: bool = False
    bounded_fanin: bool = False

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        self._check()

    def _check(self):
        n = len(self.gates)
        if not 0 <= self.output < n:
            raise ValueError(f"output gate {self.output} out of range")
        for i, g in enumerate(self.gates):
            if g.id != i:
                raise ValueError(f"gate at position {i} has id {g.id}")
            if g.kind in (ADD, MUL):
                if not g.children:
                    raise ValueError(f"gate {i}: empty {g.kind}")
                if any(not 0 <= ch < i for ch in g.children):
                    raise ValueError(f"gate {i}: children must precede it")
                if self.bounded_fanin and g.fanin > 2:
                    raise ValueError(f"gate {i}: fan-in {g.fanin} in bounded circuit")
            elif g.kind == VAR:
                if g.var is None:
                    raise ValueError(f"gate {i}: var gate without variable")
            elif g.kind == CONST:
                if self.constant_free and g.value not in (-1, 0, 1):
                    raise ValueError(f"gate {i}: constant {g.value} in constant-free circuit")
            else:
                raise ValueError(f"gate {i}: unknown kind {g.kind!r}")

    @property
    def size(self) -> int:
        return len(self.gates)

    def out_degrees(self) -> list:
        deg = [0] * len(self.gates)
        for g in self.gates:
            for ch in g.children:
                deg[ch] += 1
        return deg

    def variables(self) -> set:
        return {g.var for g in self.gates if g.kind == VAR}

    def reachable(self) -> list:
        seen = [False] * len(self.gates)
        seen[self.output] = True
        for i in range(self.output, -1, -1):
            if seen[i]:
                for ch in self.gates[i].children:
                    seen[ch] = True
        return seen

    def is_formula(self) -> bool:
        deg = self.out_degrees()
        return all(d == 1 for i, d in enumerate(deg) if i != self.output) and deg[self.output] == 0

    def uses_only_unit_constants(self) -> bool:
        return all(g.value in (-1, 0, 1) for g in self.gates if g.kind == CONST)

    def to_text(self) -> str:
        flags = []
        if self.constant_free:
            flags.append("constant_free")
        if self.bounded_fanin:
            flags.append("bounded_fanin")
        lines = [f"CIRCUIT {len(self.gates)} {self.output} {','.join(flags) or '-'}"]
        for g in self.gates:
            if g.kind == VAR:
                lines.append(f"{g.id} var {g.var}")
            elif g.kind == CONST:
                lines.append(f"{g.id} const {g.value}")
            else:
                lines.append(f"{g.id} {g.kind} " + " ".join(map(str, g.children)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str):
        lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0][0] != "CIRCUIT" or len(lines[0]) != 4:
            raise ParseError("expected 'CIRCUIT n_gates output_id flags' header")
        try:
            n, out = int(lines[0][1]), int(lines[0][2])
        except ValueError:
            raise ParseError("bad CIRCUIT header") from None
        flags = set() if lines[0][3] == "-" else set(lines[0][3].split(","))
        if len(lines) - 1 != n:
            raise ParseError(f"header declares {n} gates, found {len(lines) - 1}")
        gates = []
        try:
            for parts in lines[1:]:
                gid, kind, args = int(parts[0]), parts[1], parts[2:]
                if kind == VAR:
                    gates.append(Gate(gid, VAR, var=Var.parse(args[0])))
                elif kind == CONST:
                    gates.append(Gate(gid, CONST, value=int(args[0])))
                elif kind in (ADD, MUL):
                    gates.append(Gate(gid, kind, children=tuple(int(a) for a in args)))
                else:
                    raise ParseError(f"unknown gate kind {kind!r}")
            return cls(gates, out, "constant_free" in flags, "bounded_fanin" in flags)
        except (IndexError, ValueError) as exc:
            raise ParseError(str(exc)) from None


class Formula(Circuit):
    """A circuit whose non-output gates all have out-degree exactly one."""

    def _check(self):
        super()._check()
        if not self.is_formula():
            raise ValueError("not a formula: some gate is shared or unused")


class CircuitBuilder:
    """Append-only gate list; ``build`` drops gates unreachable from the output."""

    def __init__(self):
        self.gates: list = []
        self._var_cache: dict = {}
        self._const_cache: dict = {}

    def _push(self, **kw) -> int:
        gid = len(self.gates)
        self.gates.append(Gate(gid, **kw))
        return gid

    def var(self, v: Var, shared: bool = True) -> int:
        if shared and v in self._var_cache:
            return self._var_cache[v]
        gid = self._push(kind=VAR, var=v)
        if shared:
            self._var_cache[v] = gid
        return gid

    def const(self, c: int, shared: bool = True) -> int:
        if shared and c in self._const_cache:
            return self._const_cache[c]
        gid = self._push(kind=CONST, value=c)
        if shared:
            self._const_cache[c] = gid
        return gid

    def add(self, *children: int) -> int:
        return self._push(kind=ADD, children=tuple(children))

    def mul(self, *children: int) -> int:
        return self._push(kind=MUL, children=tuple(children))

    def poly(self, p: Poly, shared: bool = True) -> int:
        """Emit ``p`` as a sum of monomial products."""
        terms = []
        for mono, c in p.sorted_terms():
            factors = []
            if c != 1 or not mono:
                factors.append(self.const(c, shared))
            for v, e in mono:
                factors.extend(self.var(v, shared) for _ in range(e))
            terms.append(factors[0] if len(factors) == 1 else self.mul(*factors))
        if not terms:
            return self.const(0, shared)
        return terms[0] if len(terms) == 1 else self.add(*terms)

    def build(self, output: int, constant_free: bool = False, cls=Circuit) -> Circuit:
        keep = [False] * len(self.gates)
        keep[output] = True
        for i in range(output, -1, -1):
            if keep[i]:
                for ch in self.gates[i].children:
                    keep[ch] = True
        remap: dict = {}
        out = []
        for g in self.gates:
            if keep[g.id]:
                remap[g.id] = len(out)
                out.append(Gate(len(out), g.kind, g.var, g.value,
                                tuple(remap[ch] for ch in g.children)))
        return cls(out, remap[output], constant_free)


# -- evaluation -----------------------------------------------------------------

def circuit_eval_poly(c: Circuit, term_budget: int | None = None,
                      subst: Mapping[Var, Poly | int] | None = None) -> Poly:
    """Expand the output polynomial gate by gate.

    ``subst`` replaces input variables before expansion (values or
    polynomials).  Any intermediate polynomial larger than ``term_budget``
    raises :class:`TermBudgetExceeded`.
    """
    subst = {v: Poly.promote(p) for v, p in (subst or {}).items()}
    live = c.reachable()
    vals: list = [None] * len(c.gates)
    for g in c.gates:
        if not live[g.id]:
            continue
        if g.kind == VAR:
            val = subst[g.var] if g.var in subst else Poly.variable(g.var)
        elif g.kind == CONST:
            val = Poly.const(g.value)
        elif g.kind == ADD:
            val = _sum_polys(vals[ch] for ch in g.children)
        else:
            val = vals[g.children[0]]
            for ch in g.children[1:]:
                val = val * vals[ch]
        if term_budget is not None and len(val) > term_budget:
            raise TermBudgetExceeded(f"gate {g.id} expands to {len(val)} terms")
        vals[g.id] = val
    return vals[c.output]


def _sum_polys(polys: Iterable[Poly]) -> Poly:
    acc: dict = {}
    for p in polys:
        for m, coef in p.items():
            s = acc.get(m, 0) + coef
            if s:
                acc[m] = s
            else:
                acc.pop(m, None)
    return Poly(acc)


def circuit_eval_point(c: Circuit, assignment: Mapping[Var, int]) -> int:
    live = c.reachable()
    vals: list = [0] * len(c.gates)
    for g in c.gates:
        if not live[g.id]:
            continue
        if g.kind == VAR:
            try:
                vals[g.id] = assignment[g.var]
            except KeyError:
                raise MissingVariable(g.var) from None
        elif g.kind == CONST:
            vals[g.id] = g.value
        elif g.kind == ADD:
            vals[g.id] = sum(vals[ch] for ch in g.children)
        else:
            acc = 1
            for ch in g.children:
                acc *= vals[ch]
            vals[g.id] = acc
    return vals[c.output]


def formal_degree(c: Circuit) -> int:
    deg: list = [0] * len(c.gates)
    for g in c.gates:
        if g.is_leaf():
            deg[g.id] = 1
        elif g.kind == ADD:
            deg[g.id] = max(deg[ch] for ch in g.children)
        else:
            deg[g.id] = sum(deg[ch] for ch in g.children)
    return deg[c.output]


def weft(c: Circuit, fanin_threshold: int = 2) -> int:
    """Most gates of fan-in above the threshold on any leaf-to-output path."""
    w: list = [0] * len(c.gates)
    for g in c.gates:
        if g.is_leaf():
            continue
        w[g.id] = max(w[ch] for ch in g.children) + (1 if g.fanin > fanin_threshold else 0)
    return w[c.output]


def depth(c: Circuit) -> int:
    d: list = [0] * len(c.gates)
    for g in c.gates:
        if not g.is_leaf():
            d[g.id] = 1 + max(d[ch] for ch in g.children)
    return d[c.output]


# -- Boolean circuits -------------------------------------------------------------

B_VAR, B_NOT, B_AND, B_OR, B_CONST0, B_CONST1 = "var", "not", "and", "or", "const0", "const1"


@dataclass(frozen=True)
class BoolGate:
    id: int
    kind: str
    var: Var | None = None
    children: tuple = ()


@dataclass(frozen=True)
class BoolCircuit:
    gates: tuple
    output: int

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for i, g in enumerate(self.gates):
            if g.id != i:
                raise ValueError(f"gate at position {i} has id {g.id}")
            if any(not 0 <= ch < i for ch in g.children):
                raise ValueError(f"gate {i}: children must precede it")
            if g.kind == B_NOT and len(g.children) != 1:
                raise ValueError(f"gate {i}: not takes one child")
            if g.kind in (B_AND, B_OR) and not g.children:
                raise ValueError(f"gate {i}: empty {g.kind}")
            if g.kind == B_VAR and g.var is None:
                raise ValueError(f"gate {i}: var gate without variable")
        if not 0 <= self.output < len(self.gates):
            raise ValueError("output out of range")

    def variables(self) -> list:
        return sorted({g.var for g in self.gates if g.kind == B_VAR})

    def evaluate(self, assignment: Mapping[Var, int]) -> int:
        vals: list = [0] * len(self.gates)
        for g in self.gates:
            if g.kind == B_VAR:
                vals[g.id] = 1 if assignment[g.var] else 0
            elif g.kind == B_CONST0:
                vals[g.id] = 0
            elif g.kind == B_CONST1:
                vals[g.id] = 1
            elif g.kind == B_NOT:
                vals[g.id] = 1 - vals[g.children[0]]
            elif g.kind == B_AND:
                vals[g.id] = int(all(vals[ch] for ch in g.children))
            else:
                vals[g.id] = int(any(vals[ch] for ch in g.children))
        return vals[self.output]

    def to_text(self) -> str:
        lines = [f"BOOL {len(self.gates)} {self.output} -"]
        for g in self.gates:
            if g.kind == B_VAR:
                lines.append(f"{g.id} var {g.var}")
            else:
                lines.append(f"{g.id} {g.kind} " + " ".join(map(str, g.children)))
        return "\n".join(ln.rstrip() for ln in lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BoolCircuit":
        lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0][0] != "BOOL":
            raise ParseError("expected BOOL header")
        try:
            n, out = int(lines[0][1]), int(lines[0][2])
            if n != len(lines) - 1:
                raise ParseError(f"header declares {n} gates, found {len(lines) - 1}")
            gates = []
            for parts in lines[1:]:
                gid, kind = int(parts[0]), parts[1]
                if kind == B_VAR:
                    gates.append(BoolGate(gid, kind, var=Var.parse(parts[2])))
                elif kind in (B_NOT, B_AND, B_OR, B_CONST0, B_CONST1):
                    gates.append(BoolGate(gid, kind, children=tuple(int(a) for a in parts[2:])))
                else:
                    raise ParseError(f"unknown boolean gate {kind!r}")
            return cls(gates, out)
        except (IndexError, ValueError) as exc:
            raise ParseError(str(exc)) from None


class BoolBuilder:
    def __init__(self):
        self.gates: list = []

    def _push(self, kind, var=None, children=()):
        gid = len(self.gates)
        self.gates.append(BoolGate(gid, kind, var, tuple(children)))
        return gid

    def var(self, v: Var) -> int:
        return self._push(B_VAR, var=v)

    def const(self, bit: int) -> int:
        return self._push(B_CONST1 if bit else B_CONST0)

    def not_(self, a: int) -> int:
        return self._push(B_NOT, children=(a,))

    def and_(self, *cs: int) -> int:
        return self._push(B_AND, children=cs)

    def or_(self, *cs: int) -> int:
        return self._push(B_OR, children=cs)

    def build(self, output: int) -> BoolCircuit:
        return BoolCircuit(self.gates, output)


def arithmetize(b: BoolCircuit) -> Circuit:
    """Map x to x, not x to 1-x, AND to a product and OR to 1 - prod(1 - .)."""
    cb = CircuitBuilder()
    one, minus_one = cb.const(1), cb.const(-1)

    def negate(g: int) -> int:
        return cb.add(one, cb.mul(minus_one, g))

    image: dict = {}
    for g in b.gates:
        if g.kind == B_VAR:
            image[g.id] = cb.var(g.var)
        elif g.kind == B_CONST0:
            image[g.id] = cb.const(0)
        elif g.kind == B_CONST1:
            image[g.id] = one
        elif g.kind == B_NOT:
            image[g.id] = negate(image[g.children[0]])
        elif g.kind == B_AND:
            image[g.id] = cb.mul(*(image[ch] for ch in g.children))
        else:
            image[g.id] = negate(cb.mul(*(negate(image[ch]) for ch in g.children)))
    return cb.build(image[b.output], constant_free=True)


# -- formulas: layering and parse trees --------------------------------------------

def _subtree_copier(src: Circuit, cb: CircuitBuilder):
    def copy(gid: int) -> int:
        g = src.gates[gid]
        if g.kind == VAR:
            return cb.var(g.var, shared=False)
        if g.kind == CONST:
            return cb.const(g.value, shared=False)
        kids = [copy(ch) for ch in g.children]
        return cb.add(*kids) if g.kind == ADD else cb.mul(*kids)
    return copy


def is_layered(f: Circuit) -> bool:
    """Add at the top, Add/Mul alternate, every leaf sits under a Mul."""
    if not f.is_formula():
        return False
    top = f.gates[f.output]
    if top.kind != ADD:
        return False
    for g in f.gates:
        for ch in g.children:
            child = f.gates[ch]
            if g.kind == ADD and child.kind != MUL:
                return False
            if g.kind == MUL and child.kind == MUL:
                return False
    return True


def layer_formula(f: Circuit) -> Formula:
    """Semantically equal formula in layered form, padded with unary gates."""
    cb = CircuitBuilder()

    def as_add(gid: int) -> int:
        g = f.gates[gid]
        if g.kind == ADD:
            return cb.add(*(as_mul(ch) for ch in g.children))
        return cb.add(as_mul(gid))

    def as_mul(gid: int) -> int:
        g = f.gates[gid]
        if g.kind == MUL:
            return cb.mul(*(under_mul(ch) for ch in g.children))
        if g.kind == ADD:
            return cb.mul(as_add(gid))
        return cb.mul(leaf(g))

    def under_mul(gid: int) -> int:
        g = f.gates[gid]
        if g.is_leaf():
            return leaf(g)
        return as_add(gid)

    def leaf(g: Gate) -> int:
        if g.kind == VAR:
            return cb.var(g.var, shared=False)
        return cb.const(g.value, shared=False)

    if not f.is_formula():
        raise ValueError("layer_formula expects a formula")
    out = as_add(f.output)
    return cb.build(out, cls=Formula)


@dataclass(frozen=True)
class ParseTree:
    gates: frozenset
    monomial: Poly = field(compare=False)


def parse_trees(f: Circuit, budget: int = 100_000) -> list:
    """All parse trees of a formula with the monomial each one contributes.

    Add gates keep exactly one child, Mul gates keep all of them.
    """
    count = [0]

    def rec(gid: int) -> list:
        g = f.gates[gid]
        if g.kind == VAR:
            return [(frozenset([gid]), (((g.var, 1),), 1))]
        if g.kind == CONST:
            return [(frozenset([gid]), ((), g.value))]
        if g.kind == ADD:
            out = []
            for ch in g.children:
                for gates, mono in rec(ch):
                    out.append((gates | {gid}, mono))
        else:
            out = [(frozenset([gid]), ((), 1))]
            for ch in g.children:
                sub = rec(ch)
                out = [(ga | gb, (mono_mul(ma, mb), ca * cb_))
                       for ga, (ma, ca) in out for gb, (mb, cb_) in sub]
        count[0] += len(out)
        if count[0] > budget:
            raise BudgetExceeded(f"more than {budget} partial parse trees")
        return out

    if not f.is_formula():
        raise ValueError("parse trees are defined for formulas")
    return [ParseTree(gates, Poly({m: c})) for gates, (m, c) in rec(f.output)]


# -- infix expressions --------------------------------------------------------------

_VAR_RE = re.compile(r"^([A-Za-z]+?)(\d+(?:_\d+)*)$")


def parse_expr(text: str) -> Formula:
    """Parse an infix expression such as ``X1*Y1 + X2*(Y2 - 3)`` into a formula.

    Variable ``X1_2`` maps to ``Var("X", (1, 2))``.  ``**`` with a literal
    exponent copies the base subtree.
    """
    try:
        tree = ast.parse(text.strip(), mode="eval").body
    except SyntaxError as exc:
        raise ParseError(f"cannot parse expression: {exc.msg}") from None
    cb = CircuitBuilder()

    def emit(node) -> int:
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Add):
                return cb.add(emit(node.left), emit(node.right))
            if isinstance(node.op, ast.Sub):
                return cb.add(emit(node.left), cb.mul(cb.const(-1, False), emit(node.right)))
            if isinstance(node.op, ast.Mult):
                return cb.mul(emit(node.left), emit(node.right))
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)
                        and node.right.value >= 1):
                    raise ParseError("exponent must be a positive integer literal")
                return cb.mul(*(emit(node.left) for _ in range(node.right.value)))
        if isinstance(node, ast.UnaryOp):
            if isinstance(node.op, ast.USub):
                return cb.mul(cb.const(-1, False), emit(node.operand))
            if isinstance(node.op, ast.UAdd):
                return emit(node.operand)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return cb.const(node.value, False)
        if isinstance(node, ast.Name):
            m = _VAR_RE.match(node.id)
            if not m:
                raise ParseError(f"bad variable name {node.id!r}")
            return cb.var(var(m.group(1), *(int(p) for p in m.group(2).split("_"))), shared=False)
        raise ParseError(f"unsupported syntax: {ast.dump(node)[:60]}")

    return cb.build(emit(tree), cls=Formula)
