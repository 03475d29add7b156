"""Core p-adic arithmetic: construction, precision, Teichmuller, log/exp."""

import math
import random
from fractions import Fraction

import pytest

from iwalab.errors import (
    DivisionByPrecisionZero,
    FieldMismatch,
    NotAUnit,
    OutsideConvergenceDomain,
    RamifiedFieldUnsupported,
)
from iwalab.padic_core import (
    CyclotomicFrame,
    ExtensionField,
    diamond_decompose,
    diamond_pow,
    field_arithmetic,
    field_from_text,
    in_twist_domain,
    padd,
    pdiv,
    pexp,
    pinv,
    plog,
    pmul,
    ppow,
    psub,
    same_to_precision,
    teichmuller,
    with_precision,
)

Q5 = ExtensionField(5)
Q2 = ExtensionField(2)
E_SQRT5 = ExtensionField(5, "eisenstein", (-5, 0, 1))


def test_field_invariants():
    assert Q5.degree == Q5.e_ram * Q5.f_res == 1
    u = ExtensionField(7, "unramified", (3, 1, 1))
    assert (u.degree, u.e_ram, u.f_res) == (2, 1, 2)
    assert (E_SQRT5.degree, E_SQRT5.e_ram, E_SQRT5.f_res) == (2, 2, 1)


def test_field_construction_rejects_bad_moduli():
    with pytest.raises(ValueError):
        ExtensionField(5, "eisenstein", (-25, 0, 1))  # constant valuation 2
    with pytest.raises(ValueError):
        ExtensionField(5, "eisenstein", (-5, 1, 1))  # middle coeff a unit
    with pytest.raises(ValueError):
        ExtensionField(5, "unramified", (-1, 0, 1))  # x^2-1 reducible mod 5
    with pytest.raises(ValueError):
        ExtensionField(4)


def test_field_text_roundtrip():
    assert field_from_text("Qp", 5) == Q5
    assert field_from_text("eis:x^2-5", 5) == E_SQRT5
    f = field_from_text("unram:x^2+x+3", 7)
    assert f.kind == "unramified"
    assert field_from_text(f.text_form(), 7) == f


def test_add_trivial():
    r = field_arithmetic(Q5.integer(2, 4), Q5.integer(3, 4), "add")
    assert r.valuation == 1
    assert r.coeff_ints() == (5,)


def test_div_extended_gcd_value():
    # 3x = 1 mod 5^4 has x = 417
    r = field_arithmetic(Q5.one(4), Q5.integer(3, 4), "div")
    assert r.unit == (417,)


def test_sqrt5_squared():
    s = E_SQRT5.uniformizer(4)
    r = pmul(s, s)
    assert r.valuation == 1
    assert same_to_precision(r, E_SQRT5.integer(5, 4), 8)


def test_division_by_precision_zero():
    with pytest.raises(DivisionByPrecisionZero):
        pdiv(Q5.one(4), Q5.zero(4))


def test_field_mismatch():
    with pytest.raises(FieldMismatch):
        padd(Q5.one(4), Q2.one(4))


def test_precision_propagation_on_division():
    x = Q5.integer(1, 6)
    y = Q5.integer(25, 6)  # valuation 2
    q = pdiv(x, y)
    assert q.valuation == -2
    assert q.abs_precision <= 4  # two digits lost to the denominator


def test_teichmuller_values():
    assert teichmuller(Q5.one(4)).unit == (1,)
    t = teichmuller(Q5.integer(2, 4))
    assert t.unit == (182,)
    # omega(z)^(p-1) = 1
    assert same_to_precision(ppow(t, 4), Q5.one(4))
    # p = 2: the mod-4 sign character
    assert teichmuller(Q2.integer(7, 4)).coeff_ints() == (15,)
    assert teichmuller(Q2.integer(5, 4)).coeff_ints() == (1,)


def test_teichmuller_errors():
    with pytest.raises(NotAUnit):
        teichmuller(Q5.integer(10, 4))
    with pytest.raises(RamifiedFieldUnsupported):
        teichmuller(E_SQRT5.integer(2, 4))


def test_diamond_decompose_spec_values():
    om, ang = diamond_decompose(Q5.integer(2, 4))
    assert om.unit == (182,)
    assert ang.unit == (261,)
    om1, ang1 = diamond_decompose(Q5.one(4))
    assert om1.unit == (1,) and ang1.unit == (1,)
    om6, ang6 = diamond_decompose(Q5.integer(6, 4))
    assert om6.unit == (1,) and ang6.unit == (6,)


def test_plog_of_one_is_zero():
    assert plog(Q5.one(4)).is_zero_to_precision


def test_plog_6_against_power_limit_oracle():
    # independent oracle: log(x) = (x^(p^k) - 1)/p^k + O(p^(k+2)) for x in 1+pZ_p
    k = 3
    oracle = (pow(6, 5**k, 5 ** (4 + k)) - 1) // 5**k % 5**4
    got = plog(Q5.integer(6, 4))
    assert got.valpi == 1
    assert (5 * got.unit[0]) % 5**4 == oracle % 5**4 == 555


def test_exp_log_roundtrip():
    x = Q5.integer(6, 4)
    assert same_to_precision(pexp(plog(x)), x, 4)


def test_exp_log_roundtrip_random_units():
    rng = random.Random(11)
    for p in (3, 5, 7):
        F = ExtensionField(p)
        for _ in range(25):
            u = 1 + p * rng.randrange(1, p**6)
            x = F.integer(u, 8)
            assert same_to_precision(pexp(plog(x)), x, 8)


def test_log_convergence_domain():
    with pytest.raises(OutsideConvergenceDomain):
        plog(Q5.integer(2, 4))
    with pytest.raises(OutsideConvergenceDomain):
        pexp(Q5.one(4))


def test_diamond_pow_values():
    fr = CyclotomicFrame(5)
    assert diamond_pow(Q5.integer(2, 4), 0, fr).unit == (1,)
    assert diamond_pow(Q5.integer(2, 4), 2, fr).unit == (621,)
    assert diamond_pow(Q5.integer(6, 4), 3, fr).unit == (216,)
    # p-adic exponent path must agree with the integer path
    e = Q5.integer(2, 8)
    got = diamond_pow(Q5.integer(2, 8), e, fr)
    assert same_to_precision(got, diamond_pow(Q5.integer(2, 8), 2, fr), 4)


def test_diamond_pow_integer_consistency_random():
    rng = random.Random(7)
    for p in (3, 5, 7):
        F = ExtensionField(p)
        fr = CyclotomicFrame(p)
        for _ in range(20):
            z = F.integer(rng.randrange(1, p**5) * p + rng.randrange(1, p), 8)
            m = rng.randrange(-10, 11)
            viaexp = diamond_pow(z, F.integer(m, 10), fr)
            direct = diamond_pow(z, m, fr)
            assert same_to_precision(viaexp, direct, 8)


def test_diamond_decompose_battery():
    rng = random.Random(3)
    for p in (2, 3, 5, 7):
        F = ExtensionField(p)
        q0 = p if p % 2 else 4
        for _ in range(50):
            z = F.integer(rng.randrange(1, p**6) * p + rng.randrange(1, p), 8)
            om, ang = diamond_decompose(z)
            assert same_to_precision(pmul(om, ang), z, 8)
            order = p - 1 if p % 2 else 2
            assert same_to_precision(ppow(om, order), F.one(8), 8)
            one = F.one(8)
            diff = psub(ang, one)
            assert diff.is_zero_to_precision or diff.valuation >= (1 if p % 2 else 2)
            assert q0  # q0 is p or 4 by construction


def test_twist_domain():
    fr = CyclotomicFrame(5)
    assert fr.domain_valuation_floor == Fraction(-3, 4)
    assert in_twist_domain(Q5.integer(2, 4), fr)
    assert not in_twist_domain(Q5.from_rational(Fraction(1, 5), 4), fr)
    # |1/sqrt5| = 5^(1/2) < 5^(3/4)
    inv_sqrt5 = pinv(E_SQRT5.uniformizer(4))
    assert in_twist_domain(inv_sqrt5, fr)
    assert in_twist_domain(Q5.one(4), fr)
    assert not in_twist_domain(Q5.one(4), fr, excludes_one=True)


def test_precision_chain_truncation_consistency():
    # recomputing a random op chain at higher precision and truncating
    # agrees with the low-precision run on every tracked digit
    rng = random.Random(1234)
    for p in (3, 5):
        F = ExtensionField(p)

        def chain(N):
            vals = [F.integer(rng2.randrange(1, p**4), N) for _ in range(4)]
            acc = F.one(N)
            for _ in range(50):
                op = rng2.choice(["add", "sub", "mul", "div"])
                other = rng2.choice(vals)
                if op == "div" and (other.is_zero_to_precision):
                    continue
                try:
                    acc = field_arithmetic(acc, other, op)
                except DivisionByPrecisionZero:
                    continue
            return acc

        seed = rng.randrange(10**9)
        rng2 = random.Random(seed)
        low = chain(8)
        rng2 = random.Random(seed)
        high = chain(14)
        assert same_to_precision(with_precision(high, low.precpi), low, low.precpi)


def test_ppow_negative():
    x = Q5.integer(2, 6)
    assert same_to_precision(pmul(ppow(x, -3), ppow(x, 3)), Q5.one(6), 5)
