"""Classical circuits: Ryser, elementary symmetric polynomials, the weight-k
indicator B_{n,k}, the Pochhammer product, repeated squaring and the
bit-packing identity for d(n) = prod_j (2^{n^2} + j)."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .algebra import Poly, var
from .circuit import Circuit, CircuitBuilder, Formula


def int_gate(cb: CircuitBuilder, m: int) -> int:
    """Integer ``m`` from the constants 1 and -1 only (binary doubling)."""
    if m == 0:
        return cb.const(0)
    if m < 0:
        return cb.mul(cb.const(-1), int_gate(cb, -m))
    one = cb.const(1)
    acc = one
    for bit in bin(m)[3:]:
        acc = cb.add(acc, acc)
        if bit == "1":
            acc = cb.add(acc, one)
    return acc


def ryser_formula(n: int, ns: str = "X") -> Formula:
    """sum over nonempty S of (-1)^(n-|S|) prod_i sum_{j in S} X_ij, as a tree."""
    if not 1 <= n <= 10:
        raise ValueError("ryser_formula supports 1 <= n <= 10")
    cb = CircuitBuilder()
    terms = []
    for r in range(1, n + 1):
        for cols in itertools.combinations(range(1, n + 1), r):
            rows = [cb.add(*(cb.var(var(ns, i, j), shared=False) for j in cols)) for i in range(1, n + 1)]
            if (n - r) % 2:
                rows.insert(0, cb.const(-1, shared=False))
            terms.append(cb.mul(*rows))
    return cb.build(cb.add(*terms), constant_free=True, cls=Formula)


def _esp_table(cb: CircuitBuilder, xs: list, kmax: int) -> list:
    """Gates for sigma_{n,j}, j = 0..kmax, via e[i][j] = e[i-1][j] + x_i e[i-1][j-1]."""
    one = cb.const(1)
    row = [one] + [None] * kmax  # None marks the zero polynomial
    for x in xs:
        new = [one]
        for j in range(1, kmax + 1):
            keep, take = row[j], row[j - 1]
            prod = None if take is None else (x if take == one else cb.mul(take, x))
            if keep is None:
                new.append(prod)
            elif prod is None:
                new.append(keep)
            else:
                new.append(cb.add(keep, prod))
        row = new
    return row


def esp_circuit(n: int, k: int, ns: str = "X") -> Circuit:
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    cb = CircuitBuilder()
    xs = [cb.var(var(ns, i)) for i in range(1, n + 1)]
    row = _esp_table(cb, xs, k)
    return cb.build(row[k] if row[k] is not None else cb.const(0), constant_free=True)


def indicator_Bnk(n: int, k: int, ns: str = "Y") -> Circuit:
    """B_{n,k} = sum_t (-1)^t C(k+t, k) sigma_{n,k+t}: 1 on weight-k points of {0,1}^n, else 0."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    cb = CircuitBuilder()
    xs = [cb.var(var(ns, i)) for i in range(1, n + 1)]
    row = _esp_table(cb, xs, n)
    terms = []
    for t in range(n - k + 1):
        sigma = row[k + t]
        if sigma is None:
            continue
        coeff = (-1) ** t * math.comb(k + t, k)
        terms.append(sigma if coeff == 1 else cb.mul(int_gate(cb, coeff), sigma))
    return cb.build(cb.add(*terms), constant_free=True)


def pochhammer(n: int, ns: str = "X") -> tuple:
    """(prod_{i=1..n} (X + i) expanded, product-form circuit)."""
    if not 1 <= n <= 60:
        raise ValueError("pochhammer supports 1 <= n <= 60")
    x = Poly.variable(var(ns, 1))
    p = Poly.const(1)
    for i in range(1, n + 1):
        p = p * (x + i)
    cb = CircuitBuilder()
    xg = cb.var(var(ns, 1))
    factors = [cb.add(xg, int_gate(cb, i)) for i in range(1, n + 1)]
    out = factors[0] if n == 1 else cb.mul(*factors)
    return p, cb.build(out, constant_free=True)


def esp_values(values: list) -> list:
    """sigma_0..sigma_n of concrete integers, by the same recurrence."""
    e = [1] + [0] * len(values)
    for x in values:
        for j in range(len(values), 0, -1):
            e[j] += x * e[j - 1]
    return e


@dataclass
class BitpackReport:
    n: int
    product: int
    packed: int
    sigmas: list = field(repr=False)
    ok: bool = False
    no_overlap: bool = False

    @property
    def bits(self) -> int:
        return self.product.bit_length()


def bitpack_identity(n: int) -> BitpackReport:
    """prod_j (2^{n^2} + j) against sum_k sigma_k(1..n) 2^{n^2 (n-k)}."""
    if not 1 <= n <= 16:
        raise ValueError("bitpack_identity supports 1 <= n <= 16")
    shift = n * n
    product = 1
    for j in range(1, n + 1):
        product *= (1 << shift) + j
    sigmas = esp_values(list(range(1, n + 1)))
    packed = sum(s << (shift * (n - k)) for k, s in enumerate(sigmas))
    no_overlap = all(s < (1 << shift) for s in sigmas)
    return BitpackReport(n, product, packed, sigmas, product == packed, no_overlap)


def power_tower_circuits(t: int, ns: str = "X") -> tuple:
    """Constant-free circuits for X^(2^t) and 2^(2^t), each of size O(t)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    cb = CircuitBuilder()
    g = cb.var(var(ns, 1))
    for _ in range(t):
        g = cb.mul(g, g)
    xpow = cb.build(g, constant_free=True)
    cb = CircuitBuilder()
    one = cb.const(1)
    g = cb.add(one, one)
    for _ in range(t):
        g = cb.mul(g, g)
    return xpow, cb.build(g, constant_free=True)
