"""Bernoulli numbers, cyclotomic values, classical L-values, Euler factors."""

import json
import random
from fractions import Fraction

import pytest

from iwalab.characters import (
    DirichletCharacter,
    characters_mod,
    teichmuller_character,
)
from iwalab.classical_l import (
    BernoulliCache,
    CyclotomicValue,
    bernoulli,
    cyclotomic_polynomial,
    embed_cyclotomic,
    euler_factor,
    euler_factor_value,
    generalized_bernoulli,
    l_star,
    l_star_truncated,
    von_staudt_clausen_denominator,
)
from iwalab.errors import CacheCorrupt
from iwalab.padic_core import ExtensionField, pmul, psub, same_to_precision


def test_bernoulli_basics():
    assert bernoulli(0) == 1
    assert bernoulli(1) == Fraction(-1, 2)
    assert bernoulli(2) == Fraction(1, 6)
    assert bernoulli(12) == Fraction(-691, 2730)
    assert bernoulli(13) == 0


def test_von_staudt_clausen_up_to_60():
    for k in range(1, 31):
        assert bernoulli(2 * k).denominator == von_staudt_clausen_denominator(2 * k)
    assert von_staudt_clausen_denominator(12) == 2 * 3 * 5 * 7 * 13


def test_cache_persistence_roundtrip(tmp_path):
    c = BernoulliCache()
    c.get(20)
    path = tmp_path / "bern.jsonl"
    c.save(str(path))
    c2 = BernoulliCache()
    c2.load(str(path))
    assert c2.get(20) == bernoulli(20)
    assert c2.stats()["max_n"] == 20


def test_cache_corrupt_line_reports_number(tmp_path):
    path = tmp_path / "bad.jsonl"
    good = json.dumps({"n": 2, "num": "1", "den": "6"})
    path.write_text(good + "\n{oops\n")
    c = BernoulliCache()
    with pytest.raises(CacheCorrupt) as exc:
        c.load(str(path))
    assert exc.value.line_number == 2


def test_cache_rejects_wrong_value(tmp_path):
    path = tmp_path / "wrong.jsonl"
    path.write_text(json.dumps({"n": 4, "num": "1", "den": "31"}) + "\n")
    c = BernoulliCache()
    with pytest.raises(CacheCorrupt) as exc:
        c.load(str(path))
    assert exc.value.line_number == 1


def test_cyclotomic_polynomials():
    assert cyclotomic_polynomial(1) == (-1, 1)
    assert cyclotomic_polynomial(4) == (1, 0, 1)
    assert cyclotomic_polynomial(5) == (1, 1, 1, 1, 1)
    assert cyclotomic_polynomial(12) == (1, 0, -1, 0, 1)


def test_cyclotomic_arithmetic():
    z = CyclotomicValue.zeta_power(5, 1)
    acc = CyclotomicValue.from_rational(1, 5)
    for k in range(1, 5):
        acc = acc.add(CyclotomicValue.zeta_power(5, k))
    assert acc.is_zero()  # 1 + z + z^2 + z^3 + z^4 = 0
    prod = z
    for _ in range(4):
        prod = prod.mul(z)
    assert prod == CyclotomicValue.from_rational(1, 5)


def test_generalized_bernoulli_spec_values():
    assert generalized_bernoulli(2, DirichletCharacter.trivial()).as_rational() == Fraction(1, 6)
    q5 = DirichletCharacter.quadratic(5)
    assert generalized_bernoulli(2, q5).as_rational() == Fraction(4, 5)


def test_generalized_bernoulli_parity_vanishing():
    # B_{n,chi} = 0 when chi(-1) != (-1)^n, except (n, chi) = (1, trivial)
    for f in range(1, 41):
        for chi in characters_mod(f):
            chi = chi.primitivize()
            for n in range(1, 9):
                if (n, chi.order, chi.modulus) == (1, 1, 1):
                    continue
                sign_matches = (chi.parity() == "even") == (n % 2 == 0)
                if not sign_matches:
                    assert generalized_bernoulli(n, chi).is_zero(), (f, chi, n)


def test_l_star_values():
    triv = DirichletCharacter.trivial()
    assert l_star(-1, triv).as_rational() == Fraction(-1, 12)
    assert l_star(0, triv).as_rational() == Fraction(-1, 2)
    assert l_star(-3, triv).as_rational() == Fraction(1, 120)
    q5 = DirichletCharacter.quadratic(5)
    assert l_star(-1, q5).as_rational() == Fraction(-2, 5)
    assert l_star(-2, q5).is_zero()


def test_euler_factors():
    q5 = DirichletCharacter.quadratic(5)
    assert euler_factor_value(2, q5, -1).as_rational() == 3
    assert euler_factor_value(5, q5, -1).as_rational() == 1
    assert euler_factor(5, q5).linear_exponent is None
    triv = DirichletCharacter.trivial()
    assert euler_factor_value(3, triv, 0).is_zero()


def test_l_star_truncated():
    triv = DirichletCharacter.trivial()
    assert l_star_truncated(-1, triv, [5]).as_rational() == Fraction(1, 3)
    assert l_star_truncated(-1, triv, []).as_rational() == Fraction(-1, 12)
    q5 = DirichletCharacter.quadratic(5)
    assert l_star_truncated(-1, q5, [2]).as_rational() == Fraction(-6, 5)


def test_galois_equivariance():
    om = teichmuller_character(5)
    for m in (0, -1, -2):
        v = l_star(m, om)
        assert v.galois(3) == l_star(m, om.power(3))


def test_embedding_coherence_random():
    # embedding l_star into E equals computing with pre-embedded values
    rng = random.Random(31)
    Q5 = ExtensionField(5)
    pool = [
        c.primitivize()
        for f in range(1, 26)
        for c in characters_mod(f)
        if (5 - 1) % c.primitivize().order == 0
    ]
    seen = 0
    for chi in pool:
        if seen >= 12:
            break
        m = -rng.randrange(0, 4)
        v = l_star(m, chi)
        left = embed_cyclotomic(v, Q5, 10)
        # recompute the defining sum with embedded character values
        from iwalab.characters import embed
        from iwalab.classical_l import bernoulli_polynomial

        emb = embed(chi, Q5, 10)
        n = 1 - m
        f = chi.modulus
        acc = Q5.zero(10)
        for a in range(1, f + 1):
            k = chi.evaluate(a)
            if k is None:
                continue
            b = bernoulli_polynomial(n, Fraction(a, f))
            acc = acc + emb.zeta_power(k) * Q5.from_rational(b, 10)
        acc = acc * Q5.from_rational(Fraction(f) ** (n - 1) * Fraction(-1, n), 10)
        assert same_to_precision(left, acc, 9), (chi, m)
        seen += 1
