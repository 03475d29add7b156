"""Dirichlet characters: evaluation, conductor, twisting, splitting, embedding."""

import math
import random

import pytest

from iwalab.characters import (
    DirichletCharacter,
    EmbeddedCharacter,
    canonical_root,
    character_from_text,
    characters_mod,
    cyclotomic_eisenstein_field,
    embed,
    is_second_kind,
    primitive_characters,
    second_kind_split,
    teichmuller_character,
    twist,
)
from iwalab.errors import RootOfUnityUnavailable
from iwalab.padic_core import (
    ExtensionField,
    pmul,
    ppow,
    same_to_precision,
    teichmuller,
)

Q5 = ExtensionField(5)


def test_evaluate_quadratic_mod_5():
    chi = DirichletCharacter.quadratic(5)
    assert chi.evaluate(2) == 1  # 2 is a non-residue
    assert chi.evaluate(1) == 0
    assert chi.evaluate(4) == 0
    assert chi.evaluate(10) is None


def test_evaluate_order5_mod_25():
    chi = DirichletCharacter.from_values(25, 5, [(2, 1)])
    assert chi.evaluate(6) == 3  # 6 = 2^8, 8 = 3 mod 5
    assert chi.evaluate(1) == 0


def test_parity_and_conductor():
    assert DirichletCharacter.quadratic(5).parity() == "even"
    assert DirichletCharacter.quadratic(5).conductor() == 5
    assert DirichletCharacter.quadratic(3).parity() == "odd"
    assert DirichletCharacter.quadratic(3).conductor() == 3
    triv15 = DirichletCharacter.trivial(15)
    assert triv15.parity() == "even"
    assert triv15.conductor() == 1
    assert triv15.primitivize().modulus == 1


def test_parity_matches_exponent_at_minus_one():
    for f in range(1, 41):
        for chi in characters_mod(f):
            k = chi.evaluate(f - 1 if f > 1 else 1)
            assert (chi.parity() == "even") == (k == 0)


def test_complete_multiplicativity_random():
    rng = random.Random(5)
    chars = []
    for f in range(3, 40):
        chars.extend(characters_mod(f))
    rng.shuffle(chars)
    for chi in chars[:20]:
        f, d = chi.modulus, chi.order
        for _ in range(100):
            a = rng.randrange(1, 5 * f)
            b = rng.randrange(1, 5 * f)
            ka, kb, kab = chi.evaluate(a), chi.evaluate(b), chi.evaluate(a * b)
            if ka is None or kb is None:
                assert kab is None
            else:
                assert kab == (ka + kb) % d


def test_teichmuller_character():
    om5 = teichmuller_character(5)
    assert om5.order == 4 and om5.modulus == 5
    assert teichmuller_character(3) == DirichletCharacter.quadratic(3)
    om2 = teichmuller_character(2)
    assert om2.modulus == 4 and om2.order == 2


def test_twist():
    q5 = DirichletCharacter.quadratic(5)
    assert twist(DirichletCharacter.trivial(), 2, 5) == q5
    assert twist(q5, 0, 5) == q5
    om = teichmuller_character(5)
    # group law: omega^(p-2) is the inverse character
    assert om.power(5 - 2) == om.power(-1)
    # chi * omega^(p-1) is chi again after primitivization
    assert twist(om, 5 - 1, 5) == om


def test_twist_roundtrip_random():
    rng = random.Random(17)
    pool = [c for f in range(3, 41) for c in characters_mod(f)]
    for p in (3, 5, 7):
        for chi in rng.sample(pool, 12):
            j = rng.randrange(-6, 7)
            assert twist(twist(chi, j, p), -j, p) == chi.primitivize()


def test_second_kind_split():
    chi25 = DirichletCharacter.from_values(25, 5, [(2, 1)])
    theta, psi, g0 = second_kind_split(chi25, 5)
    assert theta.is_trivial()
    assert psi == chi25
    assert g0 == 3  # psi(6) = zeta_5^3
    assert is_second_kind(chi25, 5)

    q5 = DirichletCharacter.quadratic(5)
    theta, psi, _ = second_kind_split(q5, 5)
    assert theta == q5 and psi.is_trivial()
    assert not is_second_kind(q5, 5)

    chi20 = DirichletCharacter.from_values(25, 20, [(2, 1)])
    theta, psi, _ = second_kind_split(chi20, 5)
    assert theta.order == 4 and theta.conductor() == 5
    assert psi.order == 5 and psi.conductor() == 25
    assert theta.product(psi).primitivize() == chi20

    # p = 2 conventions: conductor-4 sign is tame, conductor-8 chi_8 is wild
    chi4 = DirichletCharacter.quadratic(4)
    theta, psi, _ = second_kind_split(chi4, 2)
    assert theta == chi4 and psi.is_trivial()
    chi8 = DirichletCharacter.quadratic(8)
    theta, psi, _ = second_kind_split(chi8, 2)
    assert theta.is_trivial() and psi == chi8
    assert is_second_kind(chi8, 2)


def test_trivial_is_second_kind():
    assert is_second_kind(DirichletCharacter.trivial(), 5)


def test_embed_values():
    q5 = DirichletCharacter.quadratic(5)
    e = embed(q5, Q5, 4)
    assert e.zeta_image.coeff_ints() == (624,)  # -1 mod 5^4

    om = embed(teichmuller_character(5), Q5, 4)
    assert om.zeta_image.unit == (182,)
    for a in range(1, 5):
        assert same_to_precision(om.value_at(a), teichmuller(Q5.integer(a, 4)), 4)

    with pytest.raises(RootOfUnityUnavailable):
        embed(DirichletCharacter.from_values(25, 5, [(2, 1)]), Q5, 4)


def test_embed_cyclotomic_eisenstein():
    E = cyclotomic_eisenstein_field(5, 1)
    assert E.modulus == (5, 10, 10, 5, 1)
    chi25 = DirichletCharacter.from_values(25, 5, [(2, 1)])
    ec = embed(chi25, E, 6)
    assert ec.zeta_image.coeff_ints()[:2] == (1, 1)  # the distinguished root x+1
    chi20 = DirichletCharacter.from_values(25, 20, [(2, 1)])
    e20 = embed(chi20, E, 6)
    assert same_to_precision(ppow(e20.zeta_image, 20), E.one(6))
    assert same_to_precision(ppow(e20.zeta_image, 10), E.integer(-1, 6))


def test_embed_crt_coherence():
    # embedded value at a equals the product of embedded local values
    rng = random.Random(23)
    chi = DirichletCharacter.from_values(15, 4, [(2, 2), (2, 1)])
    comps = []
    for c in chi.components:
        vals = list(zip(c.generators, c.value_exponents))
        comps.append(DirichletCharacter.from_values(c.prime_power, chi.order, vals))
    emb = embed(chi, Q5, 8)
    # local orders divide chi.order; lift local values into the full order
    embc = [embed(c, Q5, 8) for c in comps]
    for _ in range(30):
        a = rng.randrange(1, 200)
        if math.gcd(a, chi.modulus) != 1:
            assert chi.evaluate(a) is None
            continue
        prod = Q5.one(8)
        for c, ec in zip(comps, embc):
            prod = pmul(prod, ec.zeta_power(c.evaluate(a)))
        assert same_to_precision(emb.value_at(a), prod, 8)


def test_character_text_syntax():
    assert character_from_text("triv").is_trivial()
    assert character_from_text("quad:5") == DirichletCharacter.quadratic(5)
    assert character_from_text("teich:5^2") == DirichletCharacter.quadratic(5)
    chi = character_from_text("chi:f=25;d=5;vals=2->1")
    assert chi == DirichletCharacter.from_values(25, 5, [(2, 1)])
    rt = DirichletCharacter.from_json(chi.to_json())
    assert rt == chi


def test_primitive_enumeration():
    prims = list(primitive_characters(12))
    # conductors 1,3,4,5,7,8,9,11,12 contribute phi-many primitive chars each
    conds = sorted({c.conductor() for c in prims})
    assert conds == [1, 3, 4, 5, 7, 8, 9, 11, 12]
    evens = list(primitive_characters(12, even_only=True))
    assert all(c.is_even() for c in evens)
    small = list(primitive_characters(25, order_divides=20))
    assert all(20 % c.order == 0 for c in small)
    assert any(c.order == 20 for c in small)  # the mod-25 order-20 characters
