"""Exact-arithmetic helpers shared across the package.

Everything numeric in the core is a `fractions.Fraction`.  Floats appear
only as solver warm-starts and never in a certified value.
"""

from __future__ import annotations

import math
from fractions import Fraction


class MinsurfError(Exception):
    """Base class for package errors."""


class ParseError(MinsurfError):
    """Malformed input file or literal."""


class ConfigError(MinsurfError):
    """Configuration violates a documented precondition."""


class ResourceLimitError(MinsurfError):
    """A configured resource limit was exceeded.

    Carries whatever partial data was available at the point of failure in
    ``partial`` (may be None).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ContractViolation(MinsurfError):
    """An input violated an operation's contract (e.g. non-cycle to fill)."""


def parse_rational(text: str) -> Fraction:
    """Parse ``p``, ``p/q`` or a decimal literal into an exact Fraction."""
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational: {text!r}") from exc


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_vector(text: str, n: int | None = None) -> tuple[Fraction, ...]:
    parts = text.replace(",", " ").split()
    vec = tuple(parse_rational(p) for p in parts)
    if n is not None and len(vec) != n:
        raise ParseError(f"expected {n} components, got {len(vec)}: {text!r}")
    return vec


def format_vector(vec) -> str:
    return " ".join(format_rational(x) for x in vec)


def sqrt_upper(x: Fraction, bits: int = 32) -> Fraction:
    """Smallest dyadic-ish rational u with u >= sqrt(x), to ~`bits` bits."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt of negative rational")
    if x == 0:
        return Fraction(0)
    # sqrt(p/q) = sqrt(p*q)/q; bound sqrt(p*q) from above on a 2^bits grid.
    n = x.numerator * x.denominator
    scale = 1 << bits
    s = math.isqrt(n * scale * scale)
    if s * s < n * scale * scale:
        s += 1
    return Fraction(s, scale * x.denominator)


def sqrt_lower(x: Fraction, bits: int = 32) -> Fraction:
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt of negative rational")
    if x == 0:
        return Fraction(0)
    n = x.numerator * x.denominator
    scale = 1 << bits
    s = math.isqrt(n * scale * scale)
    return Fraction(s, scale * x.denominator)


def nth_root_upper(x: Fraction, n: int, bits: int = 32) -> Fraction:
    """Rational u >= x**(1/n), exact comparison based (u**n >= x)."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("root of negative rational")
    if x == 0:
        return Fraction(0)
    scale = 1 << bits
    # integer n-th root of ceil(x * scale^n), rounded up
    target = x * scale**n
    t_int = target.numerator // target.denominator + 1
    r = round(t_int ** (1.0 / n)) + 2
    while r**n > t_int:
        r -= 1
    while r**n < t_int:
        r += 1
    u = Fraction(r, scale)
    assert u**n >= x
    return u


def cmp_sqrt_sum(a: Fraction, b: Fraction, c: Fraction) -> int:
    """Exact sign of sqrt(a) - sqrt(b) - sqrt(c) for nonnegative rationals.

    Used for triangle-inequality checks on squared distances.
    """
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    if min(a, b, c) < 0:
        raise ValueError("needs nonnegative inputs")
    # sqrt(a) ? sqrt(b) + sqrt(c)  <=>  a - b - c ? 2 sqrt(bc)
    lhs = a - b - c
    if lhs < 0:
        return -1
    rhs_sq = 4 * b * c
    lhs_sq = lhs * lhs
    if lhs_sq > rhs_sq:
        return 1
    if lhs_sq < rhs_sq:
        return -1
    return 0


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to Fraction exactly")


def common_scale(fracs) -> int:
    """lcm of denominators; scaling by it makes every entry an integer."""
    d = 1
    for f in fracs:
        d = d * f.denominator // math.gcd(d, f.denominator)
    return d
