"""Dirichlet characters of (Z/f)^x with exact root-of-unity values.

Values are tracked as exponents of a formal primitive d-th root of unity,
where d is the exact order of the character.  Canonical generators are the
smallest primitive root for odd prime powers and {-1, 5} for 2-powers >= 8,
so labels are reproducible without any external database.

Embedding into an ExtensionField picks a canonical primitive d-th root:
for the prime-to-p part, a fixed power of the Teichmuller lift of the
canonical residue-field generator (all such roots are then powers of one
master root, so products of embedded characters stay coherent); for the
p-part, a power of the distinguished root x+1 of a cyclotomic Eisenstein
modulus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import NotAUnit, RootOfUnityUnavailable
from .padic_core import (
    ExtensionField,
    PadicNumber,
    is_prime,
    pmul,
    ppow,
    same_to_precision,
    teich_lift_residue,
    teichmuller,
    vp_int,
)

MAX_MODULUS = 10**7


def factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def euler_phi(n: int) -> int:
    r = 1
    for q, a in factorize(n).items():
        r *= (q - 1) * q ** (a - 1)
    return r


def multiplicative_order(g: int, modulus: int) -> int:
    if math.gcd(g, modulus) != 1:
        raise ValueError("element not a unit")
    m = euler_phi(modulus)
    order = m
    for q in factorize(m):
        while order % q == 0 and pow(g, order // q, modulus) == 1:
            order //= q
    return order


def smallest_primitive_root(q_pow: int) -> int:
    phi = euler_phi(q_pow)
    for g in range(2, q_pow):
        if math.gcd(g, q_pow) == 1 and multiplicative_order(g, q_pow) == phi:
            return g
    raise ValueError(f"no primitive root mod {q_pow}")


def _dlog(target: int, base: int, base_order: int, modulus: int) -> int:
    """Baby-step giant-step in <base> <= (Z/modulus)^x."""
    m = math.isqrt(base_order) + 1
    table = {}
    cur = 1
    for j in range(m):
        table.setdefault(cur, j)
        cur = cur * base % modulus
    giant = pow(base, -m, modulus)
    cur = target % modulus
    for i in range(m + 1):
        if cur in table:
            return (i * m + table[cur]) % base_order
        cur = cur * giant % modulus
    raise ValueError(f"{target} is not in the subgroup generated by {base} mod {modulus}")


@dataclass(frozen=True)
class LocalComponent:
    """Character data on one prime-power factor of the modulus."""

    prime: int
    exponent: int  # modulus factor is prime**exponent
    generators: tuple[int, ...]
    gen_orders: tuple[int, ...]
    value_exponents: tuple[int, ...]  # chi(g_i) = zeta_d ** value_exponents[i]

    @property
    def prime_power(self) -> int:
        return self.prime**self.exponent


def _canonical_generators(q: int, a: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if q == 2:
        if a <= 1:
            return (), ()
        if a == 2:
            return (3,), (2,)
        return (2**a - 1, 5), (2, 2 ** (a - 2))
    g = smallest_primitive_root(q**a)
    return (g,), (euler_phi(q**a),)


class DirichletCharacter:
    """A character of (Z/f)^x of exact order d, extended by zero."""

    __slots__ = ("modulus", "order", "components", "_hash")

    def __init__(self, modulus: int, order: int, components: tuple[LocalComponent, ...]):
        self.modulus = modulus
        self.order = order
        self.components = components
        self._hash = hash((modulus, order, components))

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def trivial(modulus: int = 1) -> "DirichletCharacter":
        return DirichletCharacter.from_values(modulus, 1, None)

    @staticmethod
    def from_values(modulus: int, order: int, vals) -> "DirichletCharacter":
        """Build from exponents on the canonical generators.

        vals is a list of (generator, exponent) aligned with the canonical
        generators of (Z/modulus)^x, or None for the trivial character.
        The stated order may be any multiple of each value's order; the
        exact order is recomputed.
        """
        if modulus < 1 or modulus > MAX_MODULUS:
            raise ValueError(f"modulus {modulus} out of range")
        comps = []
        flat_gens = []
        for q, a in sorted(factorize(modulus).items()):
            gens, orders = _canonical_generators(q, a)
            comps.append((q, a, gens, orders))
            flat_gens.extend(gens)
        if vals is None:
            vals = [(g, 0) for g in flat_gens]
        if [g for g, _ in vals] != flat_gens:
            raise ValueError(
                f"values must be given on the canonical generators {flat_gens}"
            )
        exps = [k % order for _, k in vals]
        # consistency: chi(g)^ord(g) = 1
        idx = 0
        for q, a, gens, orders in comps:
            for g, m in zip(gens, orders):
                if (exps[idx] * m) % order != 0:
                    raise ValueError(
                        f"exponent {exps[idx]} on generator {g} (order {m}) "
                        f"is inconsistent with order {order}"
                    )
                idx += 1
        # exact order and rescale
        d = 1
        for k in exps:
            d = math.lcm(d, order // math.gcd(order, k))
        new_exps = [k * d // order % d for k in exps]
        idx = 0
        out = []
        for q, a, gens, orders in comps:
            take = len(gens)
            out.append(
                LocalComponent(q, a, gens, orders, tuple(new_exps[idx : idx + take]))
            )
            idx += take
        return DirichletCharacter(modulus, d, tuple(out))

    @staticmethod
    def quadratic(f: int) -> "DirichletCharacter":
        """The real primitive character of conductor f in {odd prime, 4, 8}."""
        if f == 4:
            return DirichletCharacter.from_values(4, 2, [(3, 1)])
        if f == 8:
            return DirichletCharacter.from_values(8, 2, [(7, 0), (5, 1)])
        if is_prime(f) and f % 2 == 1:
            g = smallest_primitive_root(f)
            return DirichletCharacter.from_values(f, 2, [(g, 1)])
        raise ValueError(f"no canonical quadratic character for f = {f}")

    # -- evaluation -----------------------------------------------------------

    def evaluate(self, n: int):
        """Exponent k with chi(n) = zeta_order^k, or None when gcd(n, f) > 1."""
        if self.modulus == 1:
            return 0
        if math.gcd(n, self.modulus) != 1:
            return None
        total = 0
        for comp in self.components:
            qa = comp.prime_power
            r = n % qa
            if comp.prime == 2 and comp.exponent >= 3:
                # r = (-1)^s * 5^t mod 2^a
                s = 0 if r % 4 == 1 else 1
                rr = r if s == 0 else (-r) % qa
                t = _dlog(rr, 5, comp.gen_orders[1], qa)
                total += s * comp.value_exponents[0] + t * comp.value_exponents[1]
            elif comp.generators:
                t = _dlog(r, comp.generators[0], comp.gen_orders[0], qa)
                total += t * comp.value_exponents[0]
        return total % self.order

    def __call__(self, n: int):
        return self.evaluate(n)

    def is_trivial(self) -> bool:
        return self.order == 1

    def parity(self) -> str:
        k = self.evaluate(-1 % self.modulus if self.modulus > 1 else 1)
        return "even" if k == 0 else "odd"

    def is_even(self) -> bool:
        return self.parity() == "even"

    # -- conductor / primitivization -------------------------------------------

    def conductor(self) -> int:
        cond = 1
        for comp in self.components:
            q = comp.prime
            if q == 2 and comp.exponent >= 3:
                o_minus = 2 if comp.value_exponents[0] % self.order else 1
                k5 = comp.value_exponents[1]
                o5 = self.order // math.gcd(self.order, k5) if k5 else 1
                c = 1
                if o_minus == 2:
                    c = 4
                if o5 > 1:
                    c = max(c, 4 * o5)
                cond *= c
            else:
                orders = [
                    self.order // math.gcd(self.order, k) if k else 1
                    for k in comp.value_exponents
                ]
                o = math.lcm(*orders) if orders else 1
                if o == 1:
                    continue
                if q == 2:
                    cond *= 4  # the mod-4 component
                else:
                    wild = vp_int(o, q) if o % q == 0 else 0
                    cond *= q ** (1 + wild)
        return cond

    def primitivize(self) -> "DirichletCharacter":
        c = self.conductor()
        if c == self.modulus:
            return self
        return self.restrict_to_modulus(c)

    def restrict_to_modulus(self, new_modulus: int) -> "DirichletCharacter":
        """The character mod new_modulus inducing / induced by this one."""
        if new_modulus % self.conductor() != 0:
            raise ValueError("conductor does not divide the requested modulus")
        gens = []
        for q, a in sorted(factorize(new_modulus).items()):
            gg, _ = _canonical_generators(q, a)
            for g in gg:
                # lift to an integer congruent to g mod q^a, 1 mod the rest,
                # and coprime to the original modulus
                n = _crt_lift(g, q**a, new_modulus, self.modulus)
                gens.append((g, self.evaluate(n)))
        return DirichletCharacter.from_values(new_modulus, self.order, gens)

    # -- group operations -------------------------------------------------------

    def power(self, j: int) -> "DirichletCharacter":
        d = self.order
        vals = []
        for comp in self.components:
            for g, k in zip(comp.generators, comp.value_exponents):
                vals.append((g, (k * j) % d))
        return DirichletCharacter.from_values(self.modulus, d, vals or None)

    def inverse(self) -> "DirichletCharacter":
        return self.power(-1)

    def product(self, other: "DirichletCharacter") -> "DirichletCharacter":
        m = math.lcm(self.modulus, other.modulus)
        d = math.lcm(self.order, other.order)
        vals = []
        for q, a in sorted(factorize(m).items()):
            gg, _ = _canonical_generators(q, a)
            for g in gg:
                n1 = _crt_lift(g, q**a, m, self.modulus)
                n2 = _crt_lift(g, q**a, m, other.modulus)
                k1 = self.evaluate(n1)
                k2 = other.evaluate(n2)
                vals.append((g, (k1 * d // self.order + k2 * d // other.order) % d))
        return DirichletCharacter.from_values(m, d, vals or None)

    # -- serialization ------------------------------------------------------------

    def vals(self) -> list[list[int]]:
        out = []
        for comp in self.components:
            for g, k in zip(comp.generators, comp.value_exponents):
                out.append([g, k])
        return out

    def to_json(self) -> dict:
        return {"f": self.modulus, "d": self.order, "vals": self.vals()}

    @staticmethod
    def from_json(obj: dict) -> "DirichletCharacter":
        vals = [(int(g), int(k)) for g, k in obj["vals"]] or None
        return DirichletCharacter.from_values(int(obj["f"]), int(obj["d"]), vals)

    def label(self) -> str:
        if self.is_trivial() and self.modulus == 1:
            return "triv"
        vals = ",".join(f"{g}->{k}" for g, k in self.vals())
        return f"chi:f={self.modulus};d={self.order};vals={vals}"

    def __eq__(self, other):
        return (
            isinstance(other, DirichletCharacter)
            and self.modulus == other.modulus
            and self.order == other.order
            and self.components == other.components
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"DirichletCharacter(f={self.modulus}, d={self.order}, vals={self.vals()})"


def _crt_lift(g: int, q_pow: int, target_modulus: int, coprime_to: int) -> int:
    """Integer congruent to g mod q_pow and 1 modulo the q-free parts of
    both target_modulus and coprime_to (hence a unit mod either)."""
    (qq,) = factorize(q_pow).keys()
    rest = math.lcm(target_modulus, coprime_to)
    while rest % qq == 0:
        rest //= qq
    if rest == 1:
        return g
    inv = pow(q_pow, -1, rest)
    n = (g + q_pow * ((1 - g) * inv % rest)) % (q_pow * rest)
    return n if n else q_pow * rest


def teichmuller_character(p: int) -> DirichletCharacter:
    """omega_p: order p-1 mod p for odd p; the mod-4 sign character for p=2."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p == 2:
        return DirichletCharacter.quadratic(4)
    g = smallest_primitive_root(p)
    return DirichletCharacter.from_values(p, p - 1, [(g, 1)])


def twist(chi: DirichletCharacter, j: int, p: int) -> DirichletCharacter:
    """The primitive character inducing a -> chi(a) * omega_p(a)^j."""
    om = teichmuller_character(p).power(j)
    return chi.product(om).primitivize()


def second_kind_split(chi: DirichletCharacter, p: int):
    """Split chi = theta * psi with psi its wild (second-kind) part at p.

    Returns (theta, psi, gamma0_exponent) where psi(gamma~_0) =
    zeta_{psi.order}^gamma0_exponent, read off by evaluating psi at q.
    """
    d = chi.order
    comps = {c.prime: c for c in chi.components}
    comp = comps.get(p)
    if comp is None:
        theta, psi = chi, DirichletCharacter.trivial()
    elif p == 2:
        if comp.exponent >= 3:
            k_minus, k5 = comp.value_exponents
            theta = _replace_component(chi, p, (k_minus, 0))
            psi = _only_component(chi, p, (0, k5))
        else:
            theta, psi = chi, DirichletCharacter.trivial()
    else:
        (k,) = comp.value_exponents
        o = d // math.gcd(d, k) if k else 1
        o_w = p ** (vp_int(o, p) if o % p == 0 else 0)
        o_t = o // o_w
        if o_w == 1:
            theta, psi = chi, DirichletCharacter.trivial()
        else:
            u = pow(o_w, -1, o_t) if o_t > 1 else 0
            # chi_p = chi_p^(u*o_w) * chi_p^(1 - u*o_w)
            theta = _replace_component(chi, p, ((k * u * o_w) % d,))
            psi = _only_component(chi, p, ((k * (1 - u * o_w)) % d,))
    theta = theta.primitivize()
    psi = psi.primitivize()
    from .padic_core import CyclotomicFrame

    q = CyclotomicFrame(p).q
    gamma0 = psi.evaluate(q)
    assert gamma0 is not None
    return theta, psi, gamma0


def _replace_component(chi: DirichletCharacter, p: int, new_exps) -> DirichletCharacter:
    vals = []
    for comp in chi.components:
        exps = new_exps if comp.prime == p else comp.value_exponents
        for g, k in zip(comp.generators, exps):
            vals.append((g, k))
    return DirichletCharacter.from_values(chi.modulus, chi.order, vals or None)


def _only_component(chi: DirichletCharacter, p: int, exps) -> DirichletCharacter:
    comp = {c.prime: c for c in chi.components}[p]
    vals = list(zip(comp.generators, exps))
    return DirichletCharacter.from_values(comp.prime_power, chi.order, vals or None)


def is_second_kind(chi: DirichletCharacter, p: int) -> bool:
    """True when the fixed field of ker(chi) sits inside the cyclotomic
    Z_p-extension of Q, i.e. the tame part of chi is trivial."""
    theta, _, _ = second_kind_split(chi, p)
    return theta.is_trivial()


# ---------------------------------------------------------------------------
# enumeration


def characters_mod(f: int):
    """All characters of modulus f, enumerated deterministically."""
    gens = []
    orders = []
    for q, a in sorted(factorize(f).items()):
        gg, oo = _canonical_generators(q, a)
        gens.extend(gg)
        orders.extend(oo)
    if not gens:
        yield DirichletCharacter.trivial(f)
        return
    D = math.lcm(*orders)
    idx = [0] * len(gens)
    while True:
        vals = [(g, t * (D // m)) for g, m, t in zip(gens, orders, idx)]
        yield DirichletCharacter.from_values(f, D, vals)
        i = 0
        while i < len(idx):
            idx[i] += 1
            if idx[i] < orders[i]:
                break
            idx[i] = 0
            i += 1
        else:
            return


def primitive_characters(max_conductor: int, even_only: bool = False,
                         order_divides: int | None = None):
    """Primitive characters with conductor <= max_conductor, by conductor."""
    for f in range(1, max_conductor + 1):
        for chi in characters_mod(f):
            if chi.conductor() != f:
                continue
            if even_only and not chi.is_even():
                continue
            if order_divides is not None and order_divides % chi.order != 0:
                continue
            yield chi


# ---------------------------------------------------------------------------
# embeddings


def cyclotomic_eisenstein_field(p: int, level: int) -> ExtensionField:
    """The Eisenstein model of Q_p(mu_{p^level}) with modulus Phi_{p^level}(x+1)."""
    if level < 1:
        raise ValueError("level must be >= 1")
    num = _binom_poly_pow(p**level)
    den = _binom_poly_pow(p ** (level - 1))
    coeffs = _poly_div_exact(num, den)
    return ExtensionField(p, "eisenstein", tuple(coeffs))


def _binom_poly_pow(n: int) -> list[int]:
    # (x+1)^n - 1
    coeffs = [0] * (n + 1)
    c = 1
    for k in range(n + 1):
        coeffs[k] = c
        c = c * (n - k) // (k + 1)
    coeffs[0] -= 1
    return coeffs


def _poly_div_exact(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for k in range(len(out) - 1, -1, -1):
        c = num[k + len(den) - 1] // den[-1]
        out[k] = c
        for i, d in enumerate(den):
            num[k + i] -= c * d
    if any(num[: len(den) - 1]):
        raise ValueError("polynomial division was not exact")
    return out


def _eisenstein_cyclotomic_level(field: ExtensionField) -> int | None:
    if field.kind != "eisenstein":
        return None
    deg = field.degree
    p = field.p
    # deg = (p-1) p^(c-1)
    if deg % (p - 1) != 0:
        return None
    rest = deg // (p - 1)
    c = 1
    while rest > 1:
        if rest % p:
            return None
        rest //= p
        c += 1
    if cyclotomic_eisenstein_field(p, c).modulus == field.modulus:
        return c
    return None


def _canonical_residue_generator(field: ExtensionField) -> list[int]:
    """Smallest generator of the residue field's unit group, as coordinates."""
    p, f = field.p, field.f_res
    if f == 1:
        return [smallest_primitive_root(p)] if p > 2 else [1]
    from .padic_core import _fp_mul, _fp_trim  # residue arithmetic helpers

    m = [c % p for c in field.modulus]
    target = p**f - 1
    fac = factorize(target)

    def order_ok(a):
        for q in fac:
            if _fp_pow(a, target // q, m, p) == [1]:
                return False
        return True

    enc = 2
    while enc < p**f:
        a = []
        t = enc
        while t:
            a.append(t % p)
            t //= p
        a = _fp_trim(a)
        if order_ok(a):
            out = list(a) + [0] * (field.degree - len(a))
            return out
        enc += 1
    raise RuntimeError("no residue generator found")


def _fp_pow(a, n, m, p):
    from .padic_core import _fp_mulmod

    r = [1]
    b = list(a)
    while n:
        if n & 1:
            r = _fp_mulmod(r, b, m, p)
        b = _fp_mulmod(b, b, m, p)
        n >>= 1
    return r


def canonical_root(field: ExtensionField, d: int, N: int) -> PadicNumber:
    """A canonically chosen primitive d-th root of unity in the field.

    Raises RootOfUnityUnavailable (reporting the residue degree that would
    be needed) when the field has no such root.
    """
    p = field.p
    d_wild = p ** (vp_int(d, p) if d % p == 0 else 0)
    d_tame = d // d_wild
    q = p**field.f_res
    if (q - 1) % d_tame != 0:
        need = 1
        while (p**need - 1) % d_tame != 0:
            need += 1
            if need > 64:
                break
        raise RootOfUnityUnavailable(
            f"no primitive {d}-th root: need residue degree {need}, have {field.f_res}"
        )
    if d_tame == 1:
        zeta_t = field.one(N)
    elif field.f_res == 1:
        g = smallest_primitive_root(p)
        r = pow(g, (p - 1) // d_tame, p)
        zeta_t = teich_lift_residue(field, r, N)
    else:
        gamma = _canonical_residue_generator(field)
        z = field.element(gamma, N) if field.kind == "unramified" else None
        zeta_t = teichmuller(ppow(z, (q - 1) // d_tame))
    if d_wild == 1:
        zeta = zeta_t
    elif p == 2 and d_wild == 2:
        zeta = pmul(zeta_t, field.integer(-1, N))
    else:
        level = _eisenstein_cyclotomic_level(field)
        need_level = vp_int(d_wild, p)
        if level is None or level < need_level:
            raise RootOfUnityUnavailable(
                f"no primitive {d}-th root: field is not the cyclotomic "
                f"Eisenstein extension of level >= {need_level}"
            )
        one_plus_pi = field.element([1, 1], N)
        zeta_w = ppow(one_plus_pi, p ** (level - need_level))
        zeta = pmul(zeta_t, zeta_w)
    _verify_primitive_root(zeta, d, field, N)
    return zeta


def _verify_primitive_root(zeta: PadicNumber, d: int, field: ExtensionField, N: int):
    one = field.one(N)
    if not same_to_precision(ppow(zeta, d), one):
        raise RootOfUnityUnavailable(f"candidate is not a {d}-th root of unity")
    for ell in factorize(d):
        if same_to_precision(ppow(zeta, d // ell), one):
            raise RootOfUnityUnavailable(f"candidate {d}-th root is imprimitive at {ell}")


@dataclass(frozen=True)
class EmbeddedCharacter:
    """A Dirichlet character together with a p-adic image of zeta_d."""

    character: DirichletCharacter
    field: ExtensionField
    zeta_image: PadicNumber
    precision: int  # N, in p-units

    def value_at(self, n: int) -> PadicNumber:
        k = self.character.evaluate(n)
        if k is None:
            return self.field.zero(self.precision)
        return self.zeta_power(k)

    def zeta_power(self, k: int) -> PadicNumber:
        return ppow(self.zeta_image, k % self.character.order)


def embed(chi: DirichletCharacter, field: ExtensionField, N: int) -> EmbeddedCharacter:
    """Embed chi's values into the field through the canonical root."""
    zeta = canonical_root(field, chi.order, N)
    return EmbeddedCharacter(chi, field, zeta, N)


# ---------------------------------------------------------------------------
# CLI text syntax


def character_from_text(text: str) -> DirichletCharacter:
    """Parse ``triv``, ``quad:<f>``, ``teich:<p>^<j>`` or ``chi:f=..;d=..;vals=..``."""
    t = text.strip()
    if t == "triv":
        return DirichletCharacter.trivial()
    if t.startswith("quad:"):
        return DirichletCharacter.quadratic(int(t[5:]))
    if t.startswith("teich:"):
        body = t[6:]
        if "^" in body:
            ps, js = body.split("^", 1)
            return teichmuller_character(int(ps)).power(int(js)).primitivize()
        return teichmuller_character(int(body))
    if t.startswith("chi:"):
        fields = dict(part.split("=", 1) for part in t[4:].split(";"))
        f = int(fields["f"])
        d = int(fields["d"])
        vals = []
        if fields.get("vals"):
            for pair in fields["vals"].split(","):
                g, k = pair.split("->")
                vals.append((int(g), int(k)))
        return DirichletCharacter.from_values(f, d, vals or None)
    raise ValueError(f"cannot parse character {text!r}")
