"""Exact sparse multivariate polynomials over Python integers.

Variables live in small namespaces (``X``, ``Y``, ``Z``, ``E``, ...) and are
indexed by one or more nonnegative integers, so ``Var("X", (1, 2))`` is the
matrix entry X_{1,2}.  A :class:`Poly` is an immutable map from monomials to
nonzero integer coefficients; equality is structural.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, NamedTuple

from .errors import MissingVariable, ParseError


class Var(NamedTuple):
    ns: str
    idx: tuple

    def __str__(self):
        return self.ns + "." + ".".join(str(i) for i in self.idx)

    @classmethod
    def parse(cls, text: str) -> "Var":
        ns, _, rest = text.partition(".")
        if not ns or not rest:
            raise ParseError(f"bad variable {text!r}")
        try:
            idx = tuple(int(part) for part in rest.split("."))
        except ValueError:
            raise ParseError(f"bad variable {text!r}") from None
        if any(i < 0 for i in idx):
            raise ParseError(f"negative index in {text!r}")
        return cls(ns, idx)


def var(ns: str, *idx: int) -> Var:
    return Var(ns, tuple(idx))


# A monomial is a tuple of (Var, exponent) pairs sorted by Var, exponents > 0.
Monomial = tuple

ONE_MONO: Monomial = ()

# Degree of the zero polynomial.  Compares below every integer.
ZERO_DEGREE = -math.inf


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        va, ea = a[i]
        vb, eb = b[j]
        if va == vb:
            out.append((va, ea + eb))
            i += 1
            j += 1
        elif va < vb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_key(m: Monomial):
    return (mono_degree(m), m)


class Poly:
    """Immutable sparse polynomial with integer coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, int] | None = None):
        self._terms = {m: c for m, c in (terms or {}).items() if c}
        self._hash = None

    # -- constructors ---------------------------------------------------
    @classmethod
    def _raw(cls, terms: dict) -> "Poly":
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, c: int) -> "Poly":
        return cls._raw({ONE_MONO: c} if c else {})

    @classmethod
    def variable(cls, v: Var, exp: int = 1) -> "Poly":
        if exp == 0:
            return cls.const(1)
        return cls._raw({((v, exp),): 1})

    @classmethod
    def promote(cls, x) -> "Poly":
        if isinstance(x, Poly):
            return x
        if isinstance(x, Var):
            return cls.variable(x)
        if isinstance(x, int):
            return cls.const(x)
        raise TypeError(f"cannot convert {type(x).__name__} to Poly")

    # -- basic queries ----------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and ONE_MONO in self._terms)

    def constant_value(self) -> int:
        return self._terms.get(ONE_MONO, 0)

    def coeff(self, mono: Monomial) -> int:
        return self._terms.get(mono, 0)

    @property
    def degree(self):
        if not self._terms:
            return ZERO_DEGREE
        return max(mono_degree(m) for m in self._terms)

    def variables(self) -> set:
        return {v for m in self._terms for v, _ in m}

    def sorted_terms(self) -> list:
        return sorted(self._terms.items(), key=lambda t: _mono_key(t[0]))

    # -- arithmetic -------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Var)):
            other = Poly.promote(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __add__(self, other):
        other = Poly.promote(other)
        if len(other._terms) > len(self._terms):
            big, small = other._terms, self._terms
        else:
            big, small = self._terms, other._terms
        out = dict(big)
        for m, c in small.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Poly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-Poly.promote(other))

    def __rsub__(self, other):
        return Poly.promote(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            if other == 0:
                return Poly._raw({})
            return Poly._raw({m: c * other for m, c in self._terms.items()})
        other = Poly.promote(other)
        a, b = self._terms, other._terms
        if not a or not b:
            return Poly._raw({})
        if len(b) == 1 and ONE_MONO in b:
            return self * b[ONE_MONO]
        if len(a) == 1 and ONE_MONO in a:
            return other * a[ONE_MONO]
        out: dict = {}
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                m = mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Poly._raw(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative exponent")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- evaluation and substitution -------------------------------------
    def eval(self, assignment: Mapping[Var, int]) -> int:
        total = 0
        for m, c in self._terms.items():
            t = c
            for v, e in m:
                try:
                    t *= assignment[v] ** e
                except KeyError:
                    raise MissingVariable(v) from None
            total += t
        return total

    def substitute(self, subst: Mapping[Var, "Poly | int"]) -> "Poly":
        """Simultaneous substitution; variables not in ``subst`` are kept."""
        if not subst:
            return self
        images = {v: Poly.promote(p) for v, p in subst.items()}
        powers: dict = {}
        out = Poly._raw({})
        for m, c in self._terms.items():
            kept = []
            term = Poly.const(c)
            for v, e in m:
                if v in images:
                    key = (v, e)
                    if key not in powers:
                        powers[key] = images[v] ** e
                    term = term * powers[key]
                else:
                    kept.append((v, e))
            if not term:
                continue
            if kept:
                term = term * Poly._raw({tuple(kept): 1})
            out = out + term
        return out

    def partial_eval(self, assignment: Mapping[Var, int]) -> "Poly":
        return self.substitute({v: Poly.const(x) for v, x in assignment.items()})

    # -- text form ----------------------------------------------------------
    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = [str(v) if e == 1 else f"{v}^{e}" for v, e in m]
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            elif c == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(f"{c}*" + "*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")

    def to_text(self) -> str:
        lines = [f"POLY {len(self._terms)}"]
        for m, c in self.sorted_terms():
            lines.append(" ".join([str(c)] + [f"{v}^{e}" for v, e in m]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Poly":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("POLY"):
            raise ParseError("missing POLY header")
        try:
            count = int(lines[0].split()[1])
        except (IndexError, ValueError):
            raise ParseError("bad POLY header") from None
        if count != len(lines) - 1:
            raise ParseError(f"header says {count} terms, found {len(lines) - 1}")
        terms: dict = {}
        for ln in lines[1:]:
            coeff, *factors = ln.split()
            exps: dict = {}
            for f in factors:
                name, _, e = f.partition("^")
                v = Var.parse(name)
                exps[v] = exps.get(v, 0) + (int(e) if e else 1)
            mono = tuple(sorted((v, e) for v, e in exps.items() if e))
            terms[mono] = terms.get(mono, 0) + int(coeff)
        return cls(terms)


def poly_sum(polys: Iterable[Poly]) -> Poly:
    acc: dict = {}
    for p in polys:
        for m, c in p.items():
            s = acc.get(m, 0) + c
            if s:
                acc[m] = s
            else:
                acc.pop(m, None)
    return Poly._raw(acc)


def poly_prod(polys: Iterable[Poly]) -> Poly:
    out = Poly.const(1)
    for p in polys:
        out = out * p
    return out


# Functional aliases matching the operation names used in the docs.
def poly_add(a: Poly, b: Poly) -> Poly:
    return a + b


def poly_mul(a: Poly, b: Poly) -> Poly:
    return a * b


def poly_eval(p: Poly, assignment: Mapping[Var, int]) -> int:
    return p.eval(assignment)


def poly_substitute(p: Poly, subst: Mapping[Var, Poly]) -> Poly:
    return p.substitute(subst)


def X(*idx: int) -> Poly:
    return Poly.variable(var("X", *idx))


def Y(*idx: int) -> Poly:
    return Poly.variable(var("Y", *idx))
