"""Exact classical L-data: Bernoulli numbers, values in Q(zeta_d), Euler factors.

Everything here is exact rational / cyclotomic arithmetic; nothing depends
on a p-adic precision.  Values of L-functions at integers m <= 0 are
represented in Q(zeta_d) modulo the d-th cyclotomic polynomial, which is
the common sigma-independent value of the complex L-functions.

The Bernoulli cache is the single shared mutable resource in the library;
all access goes through a synchronized handle (concurrent reads, exclusive
writes, idempotent write-wins on equal values), and every write is checked
against the von Staudt-Clausen denominator.
"""

from __future__ import annotations

import json
import math
import os
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .characters import DirichletCharacter, canonical_root
from .errors import CacheCorrupt
from .padic_core import ExtensionField, PadicNumber, is_prime, padd, pmul, ppow

MAX_CYCLOTOMIC_ORDER = 2**20

CACHE_ENV = "IWALAB_CACHE"


def _binomials(n: int) -> list[int]:
    row = [1]
    for k in range(n):
        row.append(row[-1] * (n - k) // (k + 1))
    return row


def von_staudt_clausen_denominator(n: int) -> int:
    """prod of primes q with (q-1) | n, for even n >= 2."""
    d = 1
    for q in range(2, n + 2):
        if is_prime(q) and n % (q - 1) == 0:
            d *= q
    return d


class BernoulliCache:
    """Synchronized cache of Bernoulli numbers, B_1 = -1/2 convention."""

    def __init__(self):
        self._lock = threading.RLock()
        self._values: dict[int, Fraction] = {0: Fraction(1)}

    def get(self, n: int) -> Fraction:
        if n < 0:
            raise ValueError("Bernoulli index must be >= 0")
        with self._lock:
            if n in self._values:
                return self._values[n]
            if n > 1 and n % 2 == 1:
                self._store(n, Fraction(0))
                return Fraction(0)
            top = max(self._values) if self._values else 0
            for k in range(1, n + 1):
                if k in self._values:
                    continue
                if k > 1 and k % 2 == 1:
                    self._store(k, Fraction(0))
                    continue
                binom = _binomials(k + 1)
                s = sum(
                    Fraction(binom[j]) * self._values[j] for j in range(k)
                )
                self._store(k, -s / (k + 1))
            return self._values[n]

    def _store(self, n: int, value: Fraction):
        if n >= 2 and n % 2 == 0:
            expected = von_staudt_clausen_denominator(n)
            if value.denominator != expected:
                raise ArithmeticError(
                    f"von Staudt-Clausen failed at n={n}: denominator "
                    f"{value.denominator} != {expected}"
                )
        old = self._values.get(n)
        if old is not None and old != value:
            raise ArithmeticError(f"conflicting cache write for B_{n}")
        self._values[n] = value

    # -- persistence ---------------------------------------------------------

    def stats(self) -> dict:
        with self._lock:
            return {"entries": len(self._values), "max_n": max(self._values)}

    def load(self, path: str):
        with self._lock, open(path, "r", encoding="ascii") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    n = int(rec["n"])
                    val = Fraction(int(rec["num"]), int(rec["den"]))
                except (ValueError, KeyError, TypeError, ZeroDivisionError) as ex:
                    raise CacheCorrupt(lineno, str(ex)) from ex
                try:
                    self._store(n, val)
                except ArithmeticError as ex:
                    raise CacheCorrupt(lineno, str(ex)) from ex

    def save(self, path: str):
        with self._lock:
            tmp = path + ".tmp"
            with open(tmp, "w", encoding="ascii") as fh:
                for n in sorted(self._values):
                    v = self._values[n]
                    fh.write(
                        json.dumps(
                            {"n": n, "num": str(v.numerator), "den": str(v.denominator)}
                        )
                        + "\n"
                    )
            os.replace(tmp, path)


_GLOBAL_CACHE = BernoulliCache()


def default_cache() -> BernoulliCache:
    return _GLOBAL_CACHE


def bernoulli(n: int, cache: BernoulliCache | None = None) -> Fraction:
    """B_n with B_1 = -1/2, computed by the defining recurrence and cached."""
    return (cache or _GLOBAL_CACHE).get(n)


def bernoulli_polynomial(n: int, x: Fraction, cache: BernoulliCache | None = None) -> Fraction:
    """B_n(x) = sum C(n,k) B_k x^(n-k)."""
    binom = _binomials(n)
    acc = Fraction(0)
    xp = Fraction(1)
    for k in range(n, -1, -1):
        acc += binom[k] * bernoulli(k, cache) * xp
        xp *= x
    return acc


# ---------------------------------------------------------------------------
# cyclotomic values


@lru_cache(maxsize=None)
def cyclotomic_polynomial(d: int) -> tuple[int, ...]:
    """Coefficients of Phi_d, by exact division of x^d - 1."""
    if d > MAX_CYCLOTOMIC_ORDER:
        raise ValueError(f"cyclotomic order {d} exceeds the 2^20 guard")
    num = [-1] + [0] * (d - 1) + [1]
    for dd in range(1, d):
        if d % dd == 0:
            den = list(cyclotomic_polynomial(dd))
            num = _exact_poly_div(num, den)
    return tuple(num)


def _exact_poly_div(num: list[int], den) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for k in range(len(out) - 1, -1, -1):
        c = num[k + len(den) - 1] // den[-1]
        out[k] = c
        for i, dc in enumerate(den):
            num[k + i] -= c * dc
    if any(num[: len(den) - 1]):
        raise ArithmeticError("inexact cyclotomic division")
    return out


@lru_cache(maxsize=None)
def _zeta_power_coords(d: int, k: int) -> tuple[Fraction, ...]:
    """Coordinates of zeta_d^k in the power basis of Q[x]/Phi_d."""
    phi = cyclotomic_polynomial(d)
    deg = len(phi) - 1
    k %= d
    vec = [Fraction(0)] * max(deg, k + 1)
    vec[k] = Fraction(1)
    for i in range(len(vec) - 1, deg - 1, -1):
        c = vec[i]
        if c:
            vec[i] = Fraction(0)
            for j in range(deg):
                vec[i - deg + j] -= c * phi[j]
    return tuple(vec[:deg])


@dataclass(frozen=True)
class CyclotomicValue:
    """An element of Q(zeta_d) in the power basis mod Phi_d."""

    order: int
    coords: tuple[Fraction, ...]

    @staticmethod
    def from_rational(r, order: int = 1) -> "CyclotomicValue":
        deg = len(cyclotomic_polynomial(order)) - 1
        coords = [Fraction(0)] * deg
        coords[0] = Fraction(r)
        return CyclotomicValue(order, tuple(coords))

    @staticmethod
    def zeta_power(order: int, k: int) -> "CyclotomicValue":
        return CyclotomicValue(order, _zeta_power_coords(order, k))

    @property
    def degree(self) -> int:
        return len(self.coords)

    def to_order(self, d2: int) -> "CyclotomicValue":
        if d2 == self.order:
            return self
        if d2 % self.order != 0:
            raise ValueError("target order must be a multiple")
        step = d2 // self.order
        acc = CyclotomicValue.from_rational(0, d2)
        for i, c in enumerate(self.coords):
            if c:
                acc = acc.add(CyclotomicValue.zeta_power(d2, step * i).scale(c))
        return acc

    def _common(self, other: "CyclotomicValue"):
        d = math.lcm(self.order, other.order)
        return self.to_order(d), other.to_order(d)

    def add(self, other: "CyclotomicValue") -> "CyclotomicValue":
        a, b = self._common(other)
        return CyclotomicValue(a.order, tuple(x + y for x, y in zip(a.coords, b.coords)))

    def sub(self, other: "CyclotomicValue") -> "CyclotomicValue":
        return self.add(other.scale(-1))

    def scale(self, r) -> "CyclotomicValue":
        r = Fraction(r)
        return CyclotomicValue(self.order, tuple(r * c for c in self.coords))

    def mul(self, other: "CyclotomicValue") -> "CyclotomicValue":
        a, b = self._common(other)
        d = a.order
        phi = cyclotomic_polynomial(d)
        deg = len(phi) - 1
        prod = [Fraction(0)] * (2 * deg - 1 if deg > 0 else 1)
        for i, x in enumerate(a.coords):
            if x:
                for j, y in enumerate(b.coords):
                    if y:
                        prod[i + j] += x * y
        for i in range(len(prod) - 1, deg - 1, -1):
            c = prod[i]
            if c:
                prod[i] = Fraction(0)
                for j in range(deg):
                    prod[i - deg + j] -= c * phi[j]
        return CyclotomicValue(d, tuple(prod[:deg]))

    def galois(self, a: int) -> "CyclotomicValue":
        """Apply zeta -> zeta^a; requires gcd(a, order) = 1."""
        if math.gcd(a, self.order) != 1:
            raise ValueError("not a Galois automorphism")
        acc = CyclotomicValue.from_rational(0, self.order)
        for i, c in enumerate(self.coords):
            if c:
                acc = acc.add(CyclotomicValue.zeta_power(self.order, a * i).scale(c))
        return acc

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def as_rational(self) -> Fraction | None:
        """The value as a Fraction when it lies in Q, else None."""
        if self.order in (1, 2):
            return self.coords[0]
        if all(c == 0 for c in self.coords[1:]):
            return self.coords[0]
        # a rational value can also hide in a non-trivial basis; reduce
        red = self.reduce_order()
        if red.order != self.order:
            return red.as_rational()
        return None

    def reduce_order(self) -> "CyclotomicValue":
        """Rewrite in the smallest cyclotomic field Q(zeta_d'), d' | order."""
        for dd in sorted(_divisors(self.order)):
            if dd == self.order:
                return self
            try:
                cand = _project(self, dd)
            except ValueError:
                continue
            if cand is not None:
                return cand
        return self

    def __eq__(self, other):
        if not isinstance(other, CyclotomicValue):
            return NotImplemented
        a, b = self._common(other)
        return a.coords == b.coords

    def __hash__(self):
        return hash((self.order, self.coords))

    def __repr__(self):
        r = self.as_rational()
        if r is not None:
            return f"Cyc({r})"
        return f"Cyc(d={self.order}, {[str(c) for c in self.coords]})"


def _divisors(n: int) -> list[int]:
    out = [d for d in range(1, n + 1) if n % d == 0]
    return out


def _project(v: CyclotomicValue, d2: int) -> CyclotomicValue | None:
    """Inverse of to_order when the value lies in Q(zeta_d2), else None."""
    deg2 = len(cyclotomic_polynomial(d2)) - 1
    basis = [CyclotomicValue.zeta_power(d2, k).to_order(v.order) for k in range(deg2)]
    # solve a small exact linear system in the big power basis
    n = v.degree
    rows = [[b.coords[i] for b in basis] for i in range(n)]
    rhs = list(v.coords)
    sol = _solve_exact(rows, rhs)
    if sol is None:
        return None
    return CyclotomicValue(d2, tuple(sol))


def _solve_exact(rows, rhs):
    m, n = len(rows), len(rows[0]) if rows else 0
    aug = [list(r) + [rhs[i]] for i, r in enumerate(rows)]
    piv_cols = []
    r = 0
    for c in range(n):
        sel = next((i for i in range(r, m) if aug[i][c] != 0), None)
        if sel is None:
            continue
        aug[r], aug[sel] = aug[sel], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        piv_cols.append(c)
        r += 1
    sol = [Fraction(0)] * n
    for i, c in enumerate(piv_cols):
        sol[c] = aug[i][n]
    # verify (also catches inconsistent systems)
    for i in range(m):
        acc = sum(rows[i][j] * sol[j] for j in range(n))
        if acc != rhs[i]:
            return None
    return sol


# ---------------------------------------------------------------------------
# generalized Bernoulli numbers and classical L-values


def generalized_bernoulli(n: int, chi: DirichletCharacter,
                          cache: BernoulliCache | None = None) -> CyclotomicValue:
    """B_{n,chi} = f^(n-1) sum_a chi(a) B_n(a/f), exactly in Q(zeta_d)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    f, d = chi.modulus, chi.order
    acc = CyclotomicValue.from_rational(0, d)
    for a in range(1, f + 1):
        k = chi.evaluate(a)
        if k is None:
            continue
        b = bernoulli_polynomial(n, Fraction(a, f), cache)
        if b:
            acc = acc.add(CyclotomicValue.zeta_power(d, k).scale(b))
    return acc.scale(Fraction(f) ** (n - 1))


def l_star(m: int, chi: DirichletCharacter,
           cache: BernoulliCache | None = None) -> CyclotomicValue:
    """L*(m, chi) = -B_{1-m,chi}/(1-m) for m <= 0, primitive chi."""
    if m > 0:
        raise ValueError("only integers m <= 0 are in scope")
    if chi.conductor() != chi.modulus:
        raise ValueError("l_star expects a primitive character")
    n = 1 - m
    return generalized_bernoulli(n, chi, cache).scale(Fraction(-1, n))


@dataclass(frozen=True)
class EulerFactorPolynomial:
    """F_v(t, chi) = 1 - chi(v) t, or 1 when v ramifies in chi."""

    prime: int
    char_label: str
    linear_exponent: int | None  # chi(v) = zeta^k, None when chi(v) = 0

    def value_at(self, order: int, t: Fraction) -> CyclotomicValue:
        one = CyclotomicValue.from_rational(1, order)
        if self.linear_exponent is None:
            return one
        term = CyclotomicValue.zeta_power(order, self.linear_exponent).scale(t)
        return one.sub(term)


def euler_factor(v: int, chi: DirichletCharacter) -> EulerFactorPolynomial:
    if not is_prime(v):
        raise ValueError(f"{v} is not prime")
    k = chi.evaluate(v)
    return EulerFactorPolynomial(v, chi.label(), k)


def euler_factor_value(v: int, chi: DirichletCharacter, m: int) -> CyclotomicValue:
    """F_v(v^-m, chi) = 1 - chi(v) v^-m; equals 1 when v | f_chi."""
    pol = euler_factor(v, chi)
    t = Fraction(v) ** (-m)
    return pol.value_at(chi.order, t)


def l_star_truncated(m: int, chi: DirichletCharacter, S,
                     cache: BernoulliCache | None = None) -> CyclotomicValue:
    """L_S*(m, chi) = L*(m, chi) * prod_{v in S} F_v(v^-m, chi)."""
    acc = l_star(m, chi, cache)
    for v in sorted(set(S)):
        acc = acc.mul(euler_factor_value(v, chi, m))
    return acc


# ---------------------------------------------------------------------------
# embedding into a p-adic field


def embed_cyclotomic(value: CyclotomicValue, field: ExtensionField, N: int) -> PadicNumber:
    """Image of a cyclotomic value under the canonical embedding into E."""
    zeta = canonical_root(field, value.order, N)
    acc = field.zero(N)
    zp = field.one(N)
    for i, c in enumerate(value.coords):
        if c:
            acc = padd(acc, pmul(field.from_rational(c, N), zp))
        if i + 1 < len(value.coords):
            zp = pmul(zp, zeta)
    return acc
