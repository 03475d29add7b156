"""The p-adic L-function over Q: series expansion, evaluation, truncation,
and the Iwasawa power-series form.

Construction follows the classical convergent double sum over residues
a mod F, F = lcm(f_chi, q0):

    L_p(s, chi) = 1/(F(s-1)) * sum_a chi(a) <a>^(1-s)
                  * sum_j C(1-s, j) B_j (F/a)^j     (p not dividing a)

expanded around s = 1 so the possible pole sits in a symbolic prefactor.
The sign/normalization is self-calibrated: the interpolation identity
against the exact classical values is part of the test suite, and nothing
else here is trusted until it passes.

At integers m <= 0 the binomial kills all terms with j > 1 - m, so the
same sum evaluates exactly with a handful of terms; that fast path backs
the interpolation harness.

Internally the series builder works on plain integers c with an explicit
denominator exponent (value = c / p^shift) against one fixed modulus, so
reductions never silently drop tracked digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .characters import (
    DirichletCharacter,
    EmbeddedCharacter,
    cyclotomic_eisenstein_field,
    embed,
    is_second_kind,
    second_kind_split,
    twist,
)
from .classical_l import bernoulli, embed_cyclotomic, l_star_truncated
from .errors import (
    Assumption2Required,
    IntegralityViolation,
    OddCharacter,
    OutsideConvergenceDomain,
    PoleAtOne,
    PrecisionExhausted,
)
from .lambda_modules import TruncatedPowerSeries
from .padic_core import (
    CyclotomicFrame,
    ExtensionField,
    PadicNumber,
    coerce,
    diamond_pow,
    in_twist_domain,
    padd,
    pdiv,
    pexp,
    pinv,
    plog,
    pmul,
    pneg,
    ppow,
    psub,
    same_to_precision,
    vp_int,
    with_precision,
)

MAX_J_TERMS = 10**4


def auto_field(p: int, order: int) -> ExtensionField:
    """Smallest supported field containing the needed roots of unity."""
    wild = 1
    o = order
    while o % p == 0:
        o //= p
        wild *= p
    if wild == 1 or (p == 2 and wild == 2):
        return ExtensionField(p)
    return cyclotomic_eisenstein_field(p, vp_int(wild, p))


# ---------------------------------------------------------------------------
# integer kernel scalars: value = c / p^shift, c reduced mod MOD


class _Scalars:
    """Fixed-modulus integer arithmetic with explicit denominator exponents."""

    def __init__(self, p: int, mod_exp: int):
        self.p = p
        self.mod_exp = mod_exp
        self.mod = p**mod_exp

    def frac(self, r: Fraction):
        num, den = r.numerator, r.denominator
        sh = vp_int(den, self.p) if den % self.p == 0 else 0
        den_u = den // self.p**sh
        return (num * pow(den_u, -1, self.mod) % self.mod, sh)

    def add(self, x, y):
        cx, sx = x
        cy, sy = y
        s = max(sx, sy)
        return ((cx * self.p ** (s - sx) + cy * self.p ** (s - sy)) % self.mod, s)

    def mul(self, x, y):
        return (x[0] * y[0] % self.mod, x[1] + y[1])

    def div_int(self, x, n: int):
        sh = vp_int(n, self.p) if n % self.p == 0 else 0
        u = n // self.p**sh
        return (x[0] * pow(u, -1, self.mod) % self.mod, x[1] + sh)

    def neg(self, x):
        return ((-x[0]) % self.mod, x[1])

    def normalize(self, x):
        """Strip the denominator exponent of a p-integral value.

        Costs shift digits of absolute knowledge once, instead of letting
        the shift compound through every later multiplication.
        """
        c, sh = x
        if sh == 0:
            return x
        q = self.p**sh
        if c % q:
            raise ArithmeticError("normalize called on a non-integral value")
        return (c // q, 0)

    def align_series(self, coeffs):
        """Bring per-coefficient scalars to one common shift."""
        s = max((sh for _, sh in coeffs), default=0)
        return [c * self.p ** (s - sh) % self.mod for c, sh in coeffs], s

    def to_padic(self, x, field: ExtensionField, cap_N: int) -> PadicNumber:
        c, sh = x
        claim = min(self.mod_exp - sh, cap_N)
        return field.from_rational(Fraction(c, self.p**sh), claim)


def _teich_int(a: int, p: int, mod: int) -> int:
    if p == 2:
        return 1 if a % 4 == 1 else mod - 1
    x = a % mod
    for _ in range(2 * mod.bit_length() + 8):
        nx = pow(x, p, mod)
        if nx == x:
            return x
        x = nx
    raise PrecisionExhausted("Teichmuller iteration failed")


def _log_one_unit_int(y: int, sc: _Scalars, q0: int):
    """log(1+y) as a kernel scalar; v(y) >= v_p(q0) guaranteed by caller."""
    p = sc.p
    w = vp_int(math.gcd(y, sc.mod), p) if y % sc.mod else sc.mod_exp
    acc = (0, 0)
    t = y % sc.mod
    n = 1
    while n * w - math.log(max(n, 1), p) <= sc.mod_exp + 1:
        term = sc.div_int((t, 0), n)
        acc = sc.add(acc, term if n % 2 else sc.neg(term))
        t = t * y % sc.mod
        n += 1
        if n > MAX_J_TERMS:
            raise PrecisionExhausted("log series exceeded the term cap")
    return sc.normalize(acc)


# ---------------------------------------------------------------------------
# the p-adic L-series


@dataclass(frozen=True)
class PadicLSeries:
    """Expansion of (s-1)^pole_order * L_p(s, chi) in powers of (s-1)."""

    character: EmbeddedCharacter
    frame: CyclotomicFrame
    pole_order_at_1: int
    coeffs: tuple[PadicNumber, ...]
    s_precision: int
    value_precision: int  # requested N
    ledger: dict

    @property
    def field(self) -> ExtensionField:
        return self.character.field

    def coefficient_floor(self, k: int) -> Fraction:
        """Certified lower bound for v_p of the k-th coefficient."""
        beta = Fraction(self.ledger["beta"])
        off = Fraction(self.ledger["floor_offset"])
        return (k + self.pole_order_at_1) * beta - off

    def to_json(self) -> dict:
        return {
            "char": self.character.character.to_json(),
            "p": self.frame.p,
            "pole_order": self.pole_order_at_1,
            "coeffs": [_padic_json(c) for c in self.coeffs],
            "ledger": dict(self.ledger),
        }


def _padic_json(x: PadicNumber) -> dict:
    return {
        "val": "inf" if x.valpi is None else str(x.valuation),
        "digits": [str(c) for c in x.unit],
        "prec": str(x.abs_precision),
    }


def _gate_character(chi_emb: EmbeddedCharacter, assume_p2: bool, p: int):
    chi = chi_emb.character
    if chi.conductor() != chi.modulus:
        raise ValueError("the p-adic L-function wants a primitive character")
    if not chi.is_even():
        raise OddCharacter(f"character {chi.label()} is odd")
    if p == 2 and not assume_p2:
        raise Assumption2Required("p = 2 needs the Iwasawa-assumption flag")


def _sum_data(chi: DirichletCharacter, frame: CyclotomicFrame):
    F = math.lcm(chi.modulus, frame.q0)
    return F, vp_int(F, frame.p)


def lp_series(chi_emb: EmbeddedCharacter, frame: CyclotomicFrame, N: int,
              s_precision: int | None = None, assume_p2: bool = False) -> PadicLSeries:
    """Expansion of L_p(s, chi) around s = 1 at absolute precision N."""
    p = frame.p
    _gate_character(chi_emb, assume_p2, p)
    chi = chi_emb.character
    field = chi_emb.field
    beta = Fraction(vp_int(frame.q - 1, p)) - Fraction(1, p - 1)
    if s_precision is None:
        s_precision = int(math.ceil((N + 8) / beta)) + 2
    Ms = s_precision
    F, vF = _sum_data(chi, frame)

    wbase = N + 6
    # truncation of the j-sum from the lower envelope of the term valuations
    slope = vF - Fraction(1, p - 1)
    J = int((wbase + 2 + Fraction(1, p - 1)) / slope) + 2
    if J > MAX_J_TERMS:
        raise PrecisionExhausted("j-sum truncation index exceeds the cap")
    she = _vp_factorial(Ms + 1, p)
    shp = 1 + _vp_factorial(J + 1, p)
    sc = _Scalars(p, wbase + she + shp + vF + 4)
    mod = sc.mod

    # character-independent inner polynomials P_j(t) = B_j * C(-t, j)
    pjs = _binomial_bernoulli_polys(J, Ms, sc)
    # per-value-class accumulation of the a-sum
    d = chi.order
    class_sums = [[(0, 0)] * Ms for _ in range(d)]
    qmod = mod
    for a in range(1, F + 1):
        if a % p == 0:
            continue
        k = chi.evaluate(a)
        if k is None:
            continue
        om = _teich_int(a, p, qmod)
        angle = a * pow(om, -1, qmod) % qmod
        la = _log_one_unit_int(angle - 1, sc, frame.q0)
        ea = _exp_series(sc.neg(la), Ms, sc)
        ra = F * pow(a, -1, qmod) % qmod
        ia = _inner_sum(pjs, ra, Ms, sc)
        sa = _conv(ea, ia, Ms, sc)
        row = class_sums[k]
        for i in range(Ms):
            row[i] = sc.add(row[i], sa[i])

    # combine classes with embedded roots of unity, divide by F and t^pole
    pole = 1 if chi.is_trivial() else 0
    capN = sc.mod_exp
    zeta_pows = [chi_emb.zeta_power(c) for c in range(d)]
    coeffs_E: list[PadicNumber] = []
    for i in range(Ms):
        acc = field.zero(capN)
        for c in range(d):
            cell = class_sums[c][i]
            if cell[0] == 0:
                continue
            acc = padd(acc, pmul(zeta_pows[c], sc.to_padic(cell, field, capN)))
        coeffs_E.append(acc)
    fdiv = field.from_rational(Fraction(1, F), capN)
    coeffs_E = [pmul(c, fdiv) for c in coeffs_E]
    if pole == 0:
        head = coeffs_E[0]
        if head.valpi is not None and head.valpi < (N - 2) * field.e_ram:
            raise ArithmeticError(
                "constant term of a non-trivial L-series failed to vanish; "
                "construction is miscalibrated"
            )
        coeffs_E = coeffs_E[1:] + [field.zero(N)]
    coeffs_E = [with_precision(c, N * field.e_ram) for c in coeffs_E]
    ledger = {
        "N": N,
        "M": Ms,
        "delta": 0,
        "beta": str(beta),
        "floor_offset": str(1 + vF),
        "F": F,
        "J": J,
    }
    return PadicLSeries(chi_emb, frame, pole, tuple(coeffs_E), Ms, N, ledger)


def _vp_factorial(n: int, p: int) -> int:
    v = 0
    q = p
    while q <= n:
        v += n // q
        q *= p
    return v


def _binomial_bernoulli_polys(J: int, Ms: int, sc: _Scalars):
    """P_j(t) = B_j * C(-t, j) truncated to Ms terms, one common shift."""
    out = []
    binom = [(1 % sc.mod, 0)] + [(0, 0)] * (Ms - 1)  # C(-t, 0) = 1
    cur = list(binom)
    for j in range(J + 1):
        bj = bernoulli(j)
        if bj:
            bscal = sc.frac(bj)
            out.append([sc.mul(c, bscal) for c in cur])
        else:
            out.append(None)
        # C(-t, j+1) = C(-t, j) * (-t - j) / (j+1)
        nxt = [(0, 0)] * Ms
        for i in range(Ms):
            c = cur[i]
            if c[0] == 0:
                continue
            nxt[i] = sc.add(nxt[i], sc.mul(c, ((-j) % sc.mod, 0)))
            if i + 1 < Ms:
                nxt[i + 1] = sc.add(nxt[i + 1], sc.neg(c))
        cur = [sc.div_int(c, j + 1) for c in nxt]
    return out


def _exp_series(x, Ms: int, sc: _Scalars):
    """exp(x t) as a list of kernel scalars: coefficients x^k / k!."""
    out = [(1 % sc.mod, 0)]
    cur = (1 % sc.mod, 0)
    for k in range(1, Ms):
        cur = sc.div_int(sc.mul(cur, x), k)
        out.append(cur)
    return out


def _inner_sum(pjs, ra: int, Ms: int, sc: _Scalars):
    out = [(0, 0)] * Ms
    rpow = 1
    for j, pj in enumerate(pjs):
        if pj is not None:
            scal = (rpow % sc.mod, 0)
            for i in range(Ms):
                c = pj[i]
                if c[0]:
                    out[i] = sc.add(out[i], sc.mul(c, scal))
        rpow = rpow * ra % sc.mod
    return out


def _conv(a, b, Ms: int, sc: _Scalars):
    mod = sc.mod
    ac, asx = sc.align_series(a)
    bc, bsx = sc.align_series(b)
    out = [0] * Ms
    for i, ai in enumerate(ac):
        if ai:
            for j in range(Ms - i):
                bj = bc[j]
                if bj:
                    out[i + j] += ai * bj
    s = asx + bsx
    return [(c % mod, s) for c in out]


# ---------------------------------------------------------------------------
# evaluation


def lp_eval(series: PadicLSeries, e: PadicNumber) -> PadicNumber:
    """Evaluate the L-series at an admissible point e."""
    field = series.field
    e = coerce(e, field) if e.field != field else e
    if not in_twist_domain(e, series.frame):
        raise OutsideConvergenceDomain(f"e with |e|_p = {e.valuation} is inadmissible")
    one = field.one(-(-e.precpi // field.e_ram))
    t = psub(e, one)
    if series.pole_order_at_1 and (t.valpi is None):
        raise PoleAtOne("the trivial character's L-function has its pole at s = 1")
    w = t.valuation if t.valpi is not None else Fraction(t.precpi, field.e_ram)
    beta = Fraction(series.ledger["beta"])
    off = Fraction(series.ledger["floor_offset"])
    if beta + w <= 0:
        raise OutsideConvergenceDomain("tail bound does not converge at this point")
    tail = series.s_precision * (beta + w) - off
    acc = field.zero(series.value_precision + 2)
    tp = field.one(-(-t.precpi // field.e_ram))
    for k, c in enumerate(series.coeffs):
        if k:
            tp = pmul(tp, t)
        acc = padd(acc, pmul(c, tp))
    if series.pole_order_at_1:
        acc = pdiv(acc, ppow(t, series.pole_order_at_1))
        tail -= series.pole_order_at_1 * w
    cap = int(math.floor(tail * field.e_ram))
    return with_precision(acc, min(acc.precpi, cap))


def diamond_euler_factor(v: int, eta_emb: EmbeddedCharacter, s) -> PadicNumber:
    """1 - eta(v) <v>^(-s), the diamond reciprocal Euler factor at v != p."""
    field = eta_emb.field
    p = field.p
    if v == p:
        raise ValueError("the diamond factor is only defined away from p")
    N = eta_emb.precision
    k = eta_emb.character.evaluate(v)
    if k is None:
        return field.one(N)
    frame = CyclotomicFrame(p)
    base = ExtensionField(p)
    if isinstance(s, int):
        power = diamond_pow(base.integer(v, N), -s, frame)
        power = coerce(power, field)
    else:
        s_f = coerce(s, field) if s.field != field else s
        power = diamond_pow(base.integer(v, -(-s_f.precpi // field.e_ram) + 2), pneg(s_f), frame)
    return psub(field.one(N), pmul(eta_emb.zeta_power(k), power))


def lps_eval(series: PadicLSeries, e: PadicNumber, S) -> PadicNumber:
    """L_{p,S}(e, chi) = L_p(e, chi) * prod_{v in S, v != p} dEul_v(e, chi w^-1)."""
    p = series.frame.p
    S = sorted(set(S))
    if p not in S:
        raise ValueError("S must contain p")
    acc = lp_eval(series, e)
    if len(S) > 1:
        tw = _omega_inverse_twist(series)
        for v in S:
            if v != p:
                acc = pmul(acc, diamond_euler_factor(v, tw, e))
    return acc


def _omega_inverse_twist(series: PadicLSeries) -> EmbeddedCharacter:
    chi = series.character.character
    p = series.frame.p
    return embed(twist(chi, -1, p), series.field, series.value_precision)


# ---------------------------------------------------------------------------
# fast exact evaluation at integers m <= 0


def lp_value_at_integer(chi_emb: EmbeddedCharacter, frame: CyclotomicFrame,
                        m: int, N: int, assume_p2: bool = False) -> PadicNumber:
    """L_p(m, chi) for an integer m <= 0 by the terminating classical sum."""
    p = frame.p
    _gate_character(chi_emb, assume_p2, p)
    if m > 0:
        raise ValueError("integer evaluation is for m <= 0")
    chi = chi_emb.character
    field = chi_emb.field
    F, vF = _sum_data(chi, frame)
    n = 1 - m  # positive
    sc = _Scalars(p, N + vF + vp_int(n, p) + _vp_factorial(n, p) + 8)
    mod = sc.mod
    d = chi.order
    class_sums = [(0, 0)] * d
    binoms = [math.comb(n, j) for j in range(n + 1)]
    bern = [bernoulli(j) for j in range(n + 1)]
    for a in range(1, F + 1):
        if a % p == 0:
            continue
        k = chi.evaluate(a)
        if k is None:
            continue
        om = _teich_int(a, p, mod)
        angle = a * pow(om, -1, mod) % mod
        apow = pow(angle, n, mod)
        ra = F * pow(a, -1, mod) % mod
        inner = (0, 0)
        rp = 1
        for j in range(n + 1):
            if bern[j]:
                term = sc.mul(sc.frac(bern[j] * binoms[j]), (rp, 0))
                inner = sc.add(inner, term)
            rp = rp * ra % mod
        total = sc.mul((apow, 0), inner)
        class_sums[k] = sc.add(class_sums[k], total)
    capN = sc.mod_exp
    acc = field.zero(capN)
    for c in range(d):
        cell = class_sums[c]
        if cell[0]:
            acc = padd(acc, pmul(chi_emb.zeta_power(c), sc.to_padic(cell, field, capN)))
    scale = field.from_rational(Fraction(1, F * (m - 1)), capN)
    return with_precision(pmul(acc, scale), N * field.e_ram)


def lps_value_at_integer(chi_emb: EmbeddedCharacter, frame: CyclotomicFrame,
                         m: int, S, N: int, assume_p2: bool = False) -> PadicNumber:
    p = frame.p
    S = sorted(set(S))
    if p not in S:
        raise ValueError("S must contain p")
    acc = lp_value_at_integer(chi_emb, frame, m, N, assume_p2)
    if len(S) > 1:
        tw = embed(twist(chi_emb.character, -1, p), chi_emb.field, N)
        for v in S:
            if v != p:
                acc = pmul(acc, diamond_euler_factor(v, tw, m))
    return acc


# ---------------------------------------------------------------------------
# interpolation harness


@dataclass(frozen=True)
class InterpolationReport:
    p: int
    m: int
    S: tuple[int, ...]
    char_label: str
    residual_valuation: Fraction | None  # None: equal to working precision
    target: Fraction
    passed: bool
    m_zero_caveat: bool

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "m": self.m,
            "S": list(self.S),
            "char": self.char_label,
            "residual_valuation": None
            if self.residual_valuation is None
            else str(self.residual_valuation),
            "target": str(self.target),
            "passed": self.passed,
            "m_zero_caveat": self.m_zero_caveat,
        }


def interpolation_check(chi: DirichletCharacter, m: int, S, N: int, p: int,
                        assume_p2: bool = False) -> InterpolationReport:
    """v_p(L_{p,S}(m, chi) - L_S*(m, chi w^(m-1))) >= N - delta, reported.

    The check at m = 0 is classically valid for Dirichlet characters over Q
    and is flagged so reports can carry the caveat.
    """
    chi = chi.primitivize()
    frame = CyclotomicFrame(p)
    field = auto_field(p, chi.order * (p - 1 if p > 2 else 2))
    emb = embed(chi, field, N)
    left = lps_value_at_integer(emb, frame, m, S, N, assume_p2)
    twisted = twist(chi, m - 1, p)
    classical = l_star_truncated(m, twisted, S)
    right = embed_cyclotomic(classical, field, N)
    diff = psub(left, right)
    target = Fraction(N - 5)
    if diff.valpi is None:
        resid = None
        passed = True
    else:
        resid = diff.valuation
        passed = resid >= target
    return InterpolationReport(
        p, m, tuple(sorted(set(S))), chi.label(), resid, target, passed, m == 0
    )
