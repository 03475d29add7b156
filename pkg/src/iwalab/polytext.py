"""Text forms for integer polynomials.

Two interchangeable variable names are used across the CLI surface:
``x`` for field moduli (``eis:x^2-5``) and ``T`` for Iwasawa-algebra
polynomials (``c0+c1*T+...``).  Coefficients are decimal integers.
"""

from __future__ import annotations

import re

_TERM = re.compile(
    r"(?P<sign>[+-]?)\s*"
    r"(?:(?P<coef>\d+)\s*\*?\s*)?"
    r"(?:(?P<var>[A-Za-z])(?:\^(?P<exp>\d+))?)?"
)


def parse_int_poly(text: str, var: str = "x") -> list[int]:
    """Parse e.g. ``x^2-5`` or ``-5+T^2`` into a coefficient list c0..cn."""
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty polynomial")
    coeffs: dict[int, int] = {}
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse polynomial near {s[pos:]!r}")
        sign = -1 if m.group("sign") == "-" else 1
        coef = m.group("coef")
        v = m.group("var")
        if coef is None and v is None:
            raise ValueError(f"cannot parse polynomial near {s[pos:]!r}")
        if v is not None and v != var:
            raise ValueError(f"unexpected variable {v!r}, expected {var!r}")
        exp = 0
        if v is not None:
            exp = int(m.group("exp")) if m.group("exp") else 1
        c = int(coef) if coef is not None else 1
        coeffs[exp] = coeffs.get(exp, 0) + sign * c
        pos = m.end()
    deg = max(coeffs)
    return [coeffs.get(i, 0) for i in range(deg + 1)]


def format_int_poly(coeffs: list[int], var: str = "x") -> str:
    """Inverse of :func:`parse_int_poly`; omits zero terms, keeps c0 for 0."""
    parts: list[str] = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        if i == 0:
            term = str(c)
        else:
            mag = "" if abs(c) == 1 else f"{abs(c)}*"
            pow_s = var if i == 1 else f"{var}^{i}"
            term = f"{mag}{pow_s}"
            if c < 0:
                term = "-" + term
            elif parts:
                term = "+" + term
        if c > 0 and i == 0:
            pass
        elif c > 0 and i > 0 and not parts:
            pass
        elif c > 0 and parts and i == 0:
            term = "+" + term
        parts.append(term)
    if not parts:
        return "0"
    out = parts[0]
    for t in parts[1:]:
        out += t if t.startswith(("+", "-")) else "+" + t
    return out
