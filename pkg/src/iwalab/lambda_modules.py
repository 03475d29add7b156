"""Iwasawa-algebra machinery: truncated series over O_E, Weierstrass
preparation, torsion Lambda-module structure data, and a brute-force
Smith-normal-form oracle over the discrete valuation ring.

Module structure data (mu-parts and distinguished polynomials) may carry
exact rational coefficients or finite-precision PadicNumbers; the oracle
works over exact rationals localized at p, so its finiteness verdicts are
unconditional and ties in the pivoting rule are broken deterministically
(lowest row, then lowest column index).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    HypothesisNotMet,
    IndeterminateAtPrecision,
    PivotAmbiguous,
    PrecisionExhausted,
    ZeroToPrecision,
)
from .padic_core import (
    ExtensionField,
    PadicNumber,
    coerce,
    padd,
    pdiv,
    pinv,
    pmul,
    pneg,
    ppow,
    psub,
    vp_fraction,
)

DEFAULT_ORACLE_DEGREE_BOUND = 12
DEFAULT_SERIES_TERMS = 64


# ---------------------------------------------------------------------------
# truncated power series over O_E


class TruncatedPowerSeries:
    """Series over an ExtensionField's integer ring, mod T^terms.

    Integrality (all coefficient valuations >= 0) is enforced when
    ``integral=True``; intermediate arithmetic can opt out.
    """

    __slots__ = ("field", "coeffs", "terms")

    def __init__(self, field: ExtensionField, coeffs, integral: bool = True):
        self.field = field
        cs = []
        for c in coeffs:
            if isinstance(c, PadicNumber):
                cs.append(coerce(c, field) if c.field != field else c)
            else:
                cs.append(field.from_rational(Fraction(c), 40))
        self.coeffs = tuple(cs)
        self.terms = len(cs)
        if integral:
            for i, c in enumerate(cs):
                if c.valpi is not None and c.valpi < 0:
                    raise ValueError(f"coefficient {i} has negative valuation {c.valuation}")

    def __repr__(self):
        return f"Series({self.field!r}, {self.terms} terms)"

    def add(self, other: "TruncatedPowerSeries") -> "TruncatedPowerSeries":
        n = min(self.terms, other.terms)
        return TruncatedPowerSeries(
            self.field, [padd(self.coeffs[i], other.coeffs[i]) for i in range(n)], False
        )

    def sub(self, other: "TruncatedPowerSeries") -> "TruncatedPowerSeries":
        n = min(self.terms, other.terms)
        return TruncatedPowerSeries(
            self.field, [psub(self.coeffs[i], other.coeffs[i]) for i in range(n)], False
        )

    def mul(self, other: "TruncatedPowerSeries") -> "TruncatedPowerSeries":
        n = min(self.terms, other.terms)
        zero = self.field.zero(_min_prec_N(self))
        out = [zero] * n
        for i, a in enumerate(self.coeffs[:n]):
            if a.valpi is None and a.precpi <= 0:
                continue
            for j in range(n - i):
                b = other.coeffs[j]
                out[i + j] = padd(out[i + j], pmul(a, b))
        return TruncatedPowerSeries(self.field, out, False)

    def inverse(self) -> "TruncatedPowerSeries":
        c0 = self.coeffs[0]
        if c0.valpi is None or c0.valpi != 0:
            raise ZeroToPrecision("series inverse needs a unit constant term")
        inv0 = pinv(c0)
        out = [inv0]
        for k in range(1, self.terms):
            acc = self.field.zero(_min_prec_N(self))
            for j in range(1, k + 1):
                if j < self.terms:
                    acc = padd(acc, pmul(self.coeffs[j], out[k - j]))
            out.append(pneg(pmul(acc, inv0)))
        return TruncatedPowerSeries(self.field, out, False)

    def is_zero_to_precision(self) -> bool:
        return all(c.valpi is None for c in self.coeffs)

    def evaluate(self, x: PadicNumber) -> PadicNumber:
        """Horner evaluation; caps precision by the T^terms tail bound."""
        x = coerce(x, self.field) if x.field != self.field else x
        vx = x.valpi
        if vx is None:
            vx = x.precpi
        if vx <= 0:
            raise ValueError("series evaluation needs v(x) > 0")
        acc = self.field.zero(_min_prec_N(self))
        for c in reversed(self.coeffs):
            acc = padd(pmul(acc, x), c)
        from .padic_core import with_precision

        return with_precision(acc, min(acc.precpi, self.terms * vx))


def _min_prec_N(s: TruncatedPowerSeries) -> int:
    return max(1, min(-(-c.precpi // s.field.e_ram) for c in s.coeffs))


def series_from_ints(field: ExtensionField, ints, N: int, terms: int | None = None):
    cs = [field.from_rational(Fraction(c), N) for c in ints]
    if terms is not None:
        cs += [field.zero(N)] * (terms - len(cs))
    return TruncatedPowerSeries(field, cs)


# ---------------------------------------------------------------------------
# Weierstrass preparation


@dataclass(frozen=True)
class WeierstrassData:
    mu: int
    lam: int
    distinguished: tuple[PadicNumber, ...]  # monic, degree lam
    unit_head: TruncatedPowerSeries
    certification: str  # "exact" | "mu_ambiguous"

    @property
    def field(self) -> ExtensionField:
        return self.unit_head.field


def weierstrass_prepare(G: TruncatedPowerSeries, max_iter: int | None = None) -> WeierstrassData:
    """Factor G = pi^mu * g * u with g distinguished and u a unit series.

    mu is the minimal pi-valuation among retained coefficients; the
    certification degrades to "mu_ambiguous" when a coefficient that is 0
    to precision could in principle undercut that minimum.

    The factorization always reproduces G mod (pi^N', T^terms), but the
    T-truncation leaves slack in the factor coefficients near the boundary:
    g is pinned down to the full coefficient precision only when terms is
    generous relative to N' * deg(g).
    """
    field = G.field
    vals = [c.valpi for c in G.coeffs]
    if all(v is None for v in vals):
        raise ZeroToPrecision("series is 0 to working precision")
    mu = min(v for v in vals if v is not None)
    certification = "exact"
    for c in G.coeffs:
        if c.valpi is None and c.precpi <= mu:
            certification = "mu_ambiguous"
    if field.kind == "base":
        return _prepare_base_fast(G, mu, certification)
    pi = field.uniformizer(_min_prec_N(G) + mu + 2)
    pi_mu = ppow(pi, mu) if mu else field.one(_min_prec_N(G) + 2)
    g1 = [pdiv(c, pi_mu) for c in G.coeffs] if mu else list(G.coeffs)
    lam = next(i for i, c in enumerate(g1) if c.valpi == 0)

    M = G.terms
    zero = field.zero(_min_prec_N(G))
    one = field.one(_min_prec_N(G))
    g = [g1[i] if i < lam else one for i in range(lam + 1)]  # start at A + T^lam
    u_coeffs = list(g1[lam:]) + [zero] * lam
    u = TruncatedPowerSeries(field, u_coeffs, False)
    g = [zero] * lam + [one]
    G1 = TruncatedPowerSeries(field, g1, False)

    limit = max_iter if max_iter is not None else _min_prec_N(G) * field.e_ram + 6
    for _ in range(limit):
        gu = _poly_times_series(g, u)
        defect = G1.sub(gu)
        if defect.is_zero_to_precision():
            break
        c = defect.mul(u.inverse())
        # low part corrects g, high part corrects u
        for i in range(min(lam, M)):
            g[i] = padd(g[i], c.coeffs[i])
        high = TruncatedPowerSeries(field, list(c.coeffs[lam:]) + [zero] * lam, False)
        u = u.add(u.mul(high))
    else:
        raise PrecisionExhausted("Weierstrass division did not converge")

    for i in range(lam):
        ci = g[i]
        if ci.valpi is not None and ci.valpi <= 0:
            raise ArithmeticError("distinguished factor has a unit lower coefficient")
    return WeierstrassData(mu, lam, tuple(g), u, certification)


def _prepare_base_fast(G: TruncatedPowerSeries, mu: int, certification: str) -> WeierstrassData:
    """Integer-vector Weierstrass division over Z_p (pi = p)."""
    field = G.field
    p = field.p
    Nprime = min(c.precpi for c in G.coeffs)
    R = Nprime - mu
    q = p**R
    M = G.terms
    g1 = [0 if c.valpi is None else (c.coeff_ints()[0] // p**mu) % q for c in G.coeffs]
    lam = next(i for i, c in enumerate(g1) if c % p)
    u = g1[lam:] + [0] * lam
    inv0 = _series_inv_int(u, M, q, p)
    g = [0] * lam + [1]
    for _ in range(R + 4):
        gu = _poly_mul_series_int(g, u, M, q)
        defect = [(a - b) % q for a, b in zip(g1, gu)]
        if not any(defect):
            break
        c = _series_mul_int(defect, inv0, M, q)
        for i in range(lam):
            g[i] = (g[i] + c[i]) % q
        high = c[lam:] + [0] * lam
        corr = _series_mul_int(u, high, M, q)
        u = [(a + b) % q for a, b in zip(u, corr)]
    else:
        raise PrecisionExhausted("Weierstrass division did not converge")
    for ci in g[:lam]:
        if ci % p:
            raise ArithmeticError("distinguished factor has a unit lower coefficient")
    dist = tuple(field.integer(ci, R) if ci else field.zero(R) for ci in g)
    unit = TruncatedPowerSeries(
        field, [field.integer(ci, R) if ci else field.zero(R) for ci in u], False
    )
    return WeierstrassData(mu, lam, dist, unit, certification)


def _series_mul_int(a, b, M, q):
    out = [0] * M
    for i, ai in enumerate(a):
        if ai:
            for j in range(min(len(b), M - i)):
                if b[j]:
                    out[i + j] += ai * b[j]
    return [c % q for c in out]


def _poly_mul_series_int(poly, s, M, q):
    out = [0] * M
    for i, ai in enumerate(poly):
        if ai:
            for j in range(min(len(s), M - i)):
                if s[j]:
                    out[i + j] += ai * s[j]
    return [c % q for c in out]


def _series_inv_int(b, M, q, p):
    if b[0] % p == 0:
        raise ZeroToPrecision("series inverse needs a unit constant term")
    inv0 = pow(b[0], -1, q)
    out = [inv0]
    for k in range(1, M):
        acc = 0
        for j in range(1, min(k, len(b) - 1) + 1):
            acc += b[j] * out[k - j]
        out.append((-acc * inv0) % q)
    return out


def _poly_times_series(poly, s: TruncatedPowerSeries) -> TruncatedPowerSeries:
    field = s.field
    n = s.terms
    zero = field.zero(_min_prec_N(s))
    out = [zero] * n
    for i, a in enumerate(poly):
        if a.valpi is None:
            continue
        for j in range(n - i):
            out[i + j] = padd(out[i + j], pmul(a, s.coeffs[j]))
    return TruncatedPowerSeries(field, out, False)


def reconstruct(w: WeierstrassData, terms: int) -> TruncatedPowerSeries:
    """pi^mu * g * u, for roundtrip verification."""
    field = w.field
    pi = field.uniformizer(_min_prec_N(w.unit_head) + w.mu + 2)
    prod = _poly_times_series(list(w.distinguished), w.unit_head)
    scale = ppow(pi, w.mu) if w.mu else field.one(_min_prec_N(w.unit_head) + 2)
    return TruncatedPowerSeries(
        field, [pmul(scale, c) for c in prod.coeffs[:terms]], False
    )


# ---------------------------------------------------------------------------
# module structure data


def _is_padic(c) -> bool:
    return isinstance(c, PadicNumber)


@dataclass(frozen=True)
class LambdaModuleStructure:
    """Isogeny data (+)O/(pi^mu_i) (+) (+)O/(g_j(T)) for a torsion module."""

    p: int
    mu_parts: tuple[int, ...]
    poly_parts: tuple[tuple, ...]  # monic distinguished; Fraction or PadicNumber coeffs
    model: str = ""

    def __post_init__(self):
        for mu in self.mu_parts:
            if mu <= 0:
                raise ValueError("mu-parts must be positive integers")
        for g in self.poly_parts:
            _check_distinguished(g, self.p)

    @property
    def mu_total(self) -> int:
        return sum(self.mu_parts)

    def to_json(self) -> dict:
        gs = []
        for g in self.poly_parts:
            gs.append([str(Fraction(c)) if not _is_padic(c) else repr(c) for c in g])
        return {"mu": list(self.mu_parts), "g": gs}


def _check_distinguished(g, p: int):
    if len(g) < 1:
        raise ValueError("empty polynomial")
    lead = g[-1]
    if _is_padic(lead):
        if lead.valpi != 0 or lead.unit[0] % p != 1:
            raise ValueError("distinguished polynomial must be monic")
        for c in g[:-1]:
            if c.valpi is not None and c.valpi <= 0:
                raise ValueError("non-leading coefficient must have valuation >= 1")
    else:
        if Fraction(lead) != 1:
            raise ValueError("distinguished polynomial must be monic")
        for c in g[:-1]:
            c = Fraction(c)
            if c != 0 and vp_fraction(c, p) < 1:
                raise ValueError("non-leading coefficient must have valuation >= 1")


def char_series(Y: LambdaModuleStructure):
    """(mu_Y, g_Y) = (sum of mu-parts, product of the distinguished parts)."""
    g = [Fraction(1)]
    padic_field = None
    for part in Y.poly_parts:
        if any(_is_padic(c) for c in part):
            padic_field = next(c.field for c in part if _is_padic(c))
    if padic_field is None:
        for part in Y.poly_parts:
            g = _frac_poly_mul(g, [Fraction(c) for c in part])
        return Y.mu_total, g
    N = 40
    acc = [padic_field.one(N)]
    for part in Y.poly_parts:
        cast = [
            c if _is_padic(c) else padic_field.from_rational(Fraction(c), N)
            for c in part
        ]
        acc = _padic_poly_mul(acc, cast, padic_field)
    return Y.mu_total, acc


def _frac_poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _padic_poly_mul(a, b, field):
    out = [field.zero(1)] * (len(a) + len(b) - 1)
    zero_prec = max(c.precpi for c in a + b)
    out = [PadicNumber(field, None, (0,) * field.degree, zero_prec) for _ in out]
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = padd(out[i + j], pmul(x, y))
    return out


def poly_eval_exact(coeffs, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + Fraction(c)
    return acc


def poly_eval_padic(coeffs, x: PadicNumber) -> PadicNumber:
    field = x.field
    N = -(-x.precpi // field.e_ram) + 2
    acc = field.zero(N)
    for c in reversed(coeffs):
        cc = c if _is_padic(c) else field.from_rational(Fraction(c), N)
        cc = coerce(cc, field) if cc.field != field else cc
        acc = padd(pmul(acc, x), cc)
    return acc


def gamma_invariants_size(Y: LambdaModuleStructure, u):
    """Finiteness of Y^Gamma / Y_Gamma and the size ratio exponent.

    The topological generator acts as u*(1+T), u a 1-unit.  When finite,
    #Y_Gamma / #Y^Gamma = p^([E:Q_p] * ratio_valuation) with
    ratio_valuation = mu_Y * v_p(pi) + v_p(g_Y(u^-1 - 1)).

    u may be an exact Fraction (verdict unconditional) or a PadicNumber
    (raises IndeterminateAtPrecision when the value is 0 to precision but
    not structurally so).
    """
    if isinstance(u, PadicNumber):
        return gamma_invariants_size_padic(Y, u)
    mu_Y, g_Y = char_series(Y)
    u = Fraction(u)
    p = Y.p
    if u != 1 and vp_fraction(u - 1, p) < 1:
        raise ValueError("u must be a 1-unit")
    point = 1 / u - 1
    val = poly_eval_exact(g_Y, point)
    if val == 0:
        return False, None
    return True, Fraction(mu_Y) + vp_fraction(val, p)


def _is_one_unit_padic(u: PadicNumber) -> bool:
    one = u.field.one(-(-u.precpi // u.field.e_ram))
    d = psub(u, one)
    return d.valpi is None or d.valpi >= 1


def _poly_is_constant_zero(g) -> bool:
    return all((not _is_padic(c)) and Fraction(c) == 0 for c in g)


def gamma_invariants_size_padic(Y: LambdaModuleStructure, u: PadicNumber):
    """Precision-aware variant returning (finite, ratio_valuation)."""
    mu_Y, g_Y = char_series(Y)
    field = u.field
    if not _is_one_unit_padic(u):
        raise ValueError("u must be a 1-unit")
    point = psub(pinv(u), field.one(-(-u.precpi // field.e_ram)))
    val = poly_eval_padic(g_Y, point)
    if val.valpi is None:
        raise IndeterminateAtPrecision(
            f"g_Y(u^-1 - 1) is 0 mod pi^{val.precpi}; finiteness undecided"
        )
    return True, Fraction(mu_Y, field.e_ram) + val.valuation


def coinvariants_structure(poly_parts, u, p: int):
    """Per-summand data of (+)_j O/(g_j(u^-1 - 1)): valuation exponents.

    Returns a list with one entry per polynomial: a Fraction valuation
    (0 means the summand is trivial), or None when g_j(u^-1 - 1) = 0 and
    the summand is infinite.
    """
    u = Fraction(u)
    if u != 1 and vp_fraction(u - 1, p) < 1:
        raise ValueError("u must be a 1-unit")
    point = 1 / u - 1
    out = []
    for g in poly_parts:
        val = poly_eval_exact([Fraction(c) for c in g], point)
        out.append(None if val == 0 else Fraction(vp_fraction(val, p)))
    return out


# ---------------------------------------------------------------------------
# the Smith-normal-form oracle over Z_(p)


@dataclass(frozen=True)
class OracleReport:
    finite: bool
    ker_valuation: Fraction | None
    coker_valuation: Fraction | None
    cyclic: tuple[int, ...]  # valuations of the nontrivial cyclic summands
    free_rank: int  # number of structurally zero diagonal entries


def snf_oracle(g_coeffs, u, p: int, N: int | None = None,
               degree_bound: int = DEFAULT_ORACLE_DEGREE_BOUND) -> OracleReport:
    """Realize O[T]/(g) with T as the companion matrix and diagonalize
    u*(1+T) - 1 over the DVR Z_(p) by valuation-minimal pivoting.

    Arithmetic is exact (rationals localized at p), so zero pivots are
    structural; PivotAmbiguous is raised only when a precision cap N is
    supplied and a nonzero pivot sits beyond it.
    """
    g = [Fraction(c) for c in g_coeffs]
    _check_distinguished(g, p)
    n = len(g) - 1
    if n > degree_bound:
        raise ValueError(f"degree {n} exceeds oracle bound {degree_bound}")
    u = Fraction(u)
    if u != 1 and vp_fraction(u - 1, p) < 1:
        raise ValueError("u must be a 1-unit")
    if n == 0:
        return OracleReport(True, Fraction(0), Fraction(0), (), 0)
    # A = u (I + C) - I, C the companion matrix of g
    A = [[Fraction(0)] * n for _ in range(n)]
    for j in range(n):
        A[j][j] += u - 1
        if j + 1 < n:
            A[j + 1][j] += u
        else:
            for i in range(n):
                A[i][j] += -u * g[i]
    diag: list[Fraction | None] = []
    k = 0
    size = n
    while k < size:
        pivot = None
        best = None
        for i in range(k, size):
            for j in range(k, size):
                if A[i][j] != 0:
                    v = vp_fraction(A[i][j], p)
                    if best is None or v < best:
                        best = v
                        pivot = (i, j)
        if pivot is None:
            for _ in range(k, size):
                diag.append(None)
            break
        if N is not None and best >= N:
            raise PivotAmbiguous(
                f"pivot valuation {best} is not visible below the cap {N}"
            )
        pi, pj = pivot
        A[k], A[pi] = A[pi], A[k]
        for row in A:
            row[k], row[pj] = row[pj], row[k]
        piv = A[k][k]
        for i in range(k + 1, size):
            if A[i][k] != 0:
                f = A[i][k] / piv
                A[i] = [x - f * y for x, y in zip(A[i], A[k])]
        for j in range(k + 1, size):
            if A[k][j] != 0:
                f = A[k][j] / piv
                for i in range(size):
                    A[i][j] -= f * A[i][k]
        diag.append(vp_fraction(piv, p))
        k += 1
    free_rank = sum(1 for d in diag if d is None)
    if free_rank:
        return OracleReport(False, None, None,
                            tuple(int(d) for d in diag if d), free_rank)
    cyc = tuple(int(d) for d in sorted(diag) if d)
    return OracleReport(True, Fraction(0), Fraction(sum(diag)), cyc, 0)


# ---------------------------------------------------------------------------
# the main-conjecture link


def main_conjecture_link(W: WeierstrassData, p: int, chi_order: int,
                         assume_p2: bool = False) -> LambdaModuleStructure:
    """Transport Weierstrass data of the analytic series to module
    structure data; refuses outside the proved hypotheses."""
    if p == 2:
        if not assume_p2:
            raise HypothesisNotMet("p = 2 requires the Iwasawa-assumption flag")
        if chi_order % 2 == 0:
            raise HypothesisNotMet("p = 2 link needs a character of odd order")
    elif chi_order % p == 0:
        raise HypothesisNotMet(f"link needs p not dividing the character order {chi_order}")
    mu_parts = (W.mu,) if W.mu > 0 else ()
    poly_parts = (tuple(W.distinguished),) if W.lam > 0 else ()
    return LambdaModuleStructure(p, mu_parts, poly_parts, model="analytic side")


# ---------------------------------------------------------------------------
# polynomial text format (decimal or base-p digit coefficients)

_DIGIT_COEF = re.compile(r"^\((\d+)\.(\d+)\)_(\d+)$")


def base_digit_coefficient(text: str, p: int | None = None) -> int:
    """Value of ``(a0.a1...am)_p`` as a0 + sum a_i p^i."""
    m = _DIGIT_COEF.match(text.strip())
    if not m:
        raise ValueError(f"bad digit coefficient {text!r}")
    head, tail, base = m.group(1), m.group(2), int(m.group(3))
    if p is not None and base != p:
        raise ValueError(f"digit base {base} does not match p = {p}")
    val = int(head)
    for i, ch in enumerate(tail, start=1):
        d = int(ch)
        if d >= base:
            raise ValueError(f"digit {d} out of range for base {base}")
        val += d * base**i
    return val


def parse_T_poly(text: str, p: int | None = None) -> list[Fraction]:
    """Parse ``c0+c1*T+...`` with decimal or digit-string coefficients."""
    s = text.replace(" ", "")
    # the digit form contains no +/- signs, so simple splitting suffices
    parts: list[str] = []
    buf = ""
    for ch in s:
        if ch in "+-" and buf and not buf.endswith(("e", "(")):
            parts.append(buf)
            buf = ch
        else:
            buf += ch
    if buf:
        parts.append(buf)
    coeffs: dict[int, Fraction] = {}
    for term in parts:
        sign = 1
        t = term
        if t.startswith("+"):
            t = t[1:]
        elif t.startswith("-"):
            sign = -1
            t = t[1:]
        if "T" in t:
            coef_s, _, pow_s = t.partition("T")
            coef_s = coef_s.rstrip("*")
            k = int(pow_s[1:]) if pow_s.startswith("^") else 1
        else:
            coef_s, k = t, 0
        if not coef_s:
            c = Fraction(1)
        elif coef_s.startswith("("):
            c = Fraction(base_digit_coefficient(coef_s, p))
        else:
            c = Fraction(coef_s)
        coeffs[k] = coeffs.get(k, 0) + sign * c
    deg = max(coeffs) if coeffs else 0
    return [coeffs.get(i, Fraction(0)) for i in range(deg + 1)]
