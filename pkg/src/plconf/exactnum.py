"""Exact number types: rationals and n-adic rationals m / n^e.

Rationals are plain :class:`fractions.Fraction` values. :class:`NAdic` keeps
its base so values from different bases cannot be mixed by accident.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from gmpy2 import mpq

Rational = Fraction
Number = Union[int, Fraction, "NAdic"]


class InvalidBase(ValueError):
    pass


class NotCoprime(ValueError):
    pass


class BaseMismatch(ValueError):
    pass


class ParseError(ValueError):
    pass


def check_base(n: int) -> None:
    if not isinstance(n, int) or n < 2:
        raise InvalidBase(f"base must be an integer >= 2, got {n!r}")


def _strip(value: int, n: int) -> tuple[int, int]:
    # divide out n from value as often as possible
    e = 0
    while value % n == 0:
        value //= n
        e += 1
    return value, e


@dataclass(frozen=True)
class NAdic:
    """The rational ``m / n**e`` with ``n`` not dividing ``m`` unless ``e == 0``."""

    n: int
    m: int
    e: int = 0

    def __post_init__(self):
        check_base(self.n)
        if self.e < 0:
            raise ValueError("exponent must be non-negative")
        m, e = self.m, self.e
        while e > 0 and m % self.n == 0:
            m //= self.n
            e -= 1
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "e", e)

    @property
    def value(self) -> Fraction:
        return Fraction(self.m, self.n ** self.e)

    def _other(self, other) -> Fraction:
        if isinstance(other, NAdic):
            if other.n != self.n:
                raise BaseMismatch(f"cannot combine base {self.n} with base {other.n}")
            return other.value
        if isinstance(other, int):
            return Fraction(other)
        return NotImplemented

    def _wrap(self, x: Fraction) -> "NAdic":
        out = is_nadic(x, self.n)
        if out is None:
            raise ValueError(f"{x} is not in Z[1/{self.n}]")
        return out

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value - o)

    def __rsub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(o - self.value)

    def __mul__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value * o)

    __rmul__ = __mul__

    def __neg__(self):
        return NAdic(self.n, -self.m, self.e)

    def __lt__(self, other):
        return self.value < self._other(other)

    def __le__(self, other):
        return self.value <= self._other(other)

    def __gt__(self, other):
        return self.value > self._other(other)

    def __ge__(self, other):
        return self.value >= self._other(other)

    def __str__(self) -> str:
        return f"{self.m}/{self.n}^{self.e}"


def is_nadic(x: Union[int, Fraction], n: int) -> Optional[NAdic]:
    """Return ``x`` as an :class:`NAdic` in base ``n``, or ``None`` if it is not in Z[1/n]."""
    check_base(n)
    x = mpq(x)
    q = x.denominator
    e = 0
    power = 1
    while q != 1:
        g = math.gcd(q, n)
        if g == 1:
            return None
        q //= g
    # smallest e with denominator | n^e
    while power % x.denominator:
        power *= n
        e += 1
    return NAdic(n, x.numerator * (power // x.denominator), e)


def in_nadic_ring(x: Fraction, n: int) -> bool:
    q = x.denominator
    while q != 1:
        g = math.gcd(q, n)
        if g == 1:
            return False
        q //= g
    return True


def mult_order(n: int, m: int) -> int:
    """Smallest ``o >= 1`` with ``n**o == 1 (mod m)``."""
    if m < 1:
        raise ValueError("modulus must be positive")
    if math.gcd(n, m) != 1:
        raise NotCoprime(f"gcd({n}, {m}) != 1")
    if m == 1:
        return 1
    o, power = 1, n % m
    while power != 1:
        power = power * n % m
        o += 1
    return o


def coprime_part(q: int, n: int) -> tuple[int, int]:
    """Split ``q = q' * d`` with ``gcd(q', n) = 1`` and the primes of ``d`` dividing ``n``.

    Returns ``(q', l)`` with ``l`` minimal such that ``d`` divides ``n**l``.
    """
    if q < 1:
        raise ValueError("q must be positive")
    check_base(n)
    d = 1
    rest = q
    g = math.gcd(rest, n)
    while g > 1:
        rest //= g
        d *= g
        g = math.gcd(rest, n)
    ell, power = 0, 1
    while power % d:
        power *= n
        ell += 1
    return rest, ell


def log_n(x: Fraction, n: int) -> int:
    """Exact base-n logarithm of a power of n; raises ValueError otherwise."""
    x = mpq(x)
    if x <= 0:
        raise ValueError(f"{x} is not a power of {n}")
    num, den = x.numerator, x.denominator
    if den == 1:
        k, rest = 0, num
        while rest % n == 0:
            rest //= n
            k += 1
        if rest != 1:
            raise ValueError(f"{x} is not a power of {n}")
        return k
    if num != 1:
        raise ValueError(f"{x} is not a power of {n}")
    return -log_n(mpq(den), n)


def nadic_residue(x: Fraction, n: int) -> int:
    """Class of an n-adic rational modulo (n - 1) Z[1/n].

    Since n = 1 mod (n - 1), the class of m / n^e is m mod (n - 1).
    """
    nd = is_nadic(x, n)
    if nd is None:
        raise ValueError(f"{x} is not in Z[1/{n}]")
    return nd.m % (n - 1) if n > 2 else 0


def nadic_between(lo: Fraction, hi: Fraction, n: int, residue: Optional[int] = None) -> Fraction:
    """Least-denominator n-adic in the open interval (lo, hi), ties by least numerator.

    With ``residue`` set, only values in that class mod (n - 1) Z[1/n] qualify.
    """
    if not lo < hi:
        raise ValueError("empty interval")
    e, power = 0, 1
    while True:
        m = math.floor(lo * power) + 1
        while mpq(m, power) < hi:
            if residue is None or n == 2 or m % (n - 1) == residue:
                return mpq(m, power)
            m += 1
            if residue is None:
                break
        e += 1
        power *= n


_NADIC_RE = re.compile(r"^\s*(-?\d+)\s*/\s*(\d+)\s*\^\s*(\d+)\s*$")
_RAT_RE = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_nadic(text: str) -> NAdic:
    match = _NADIC_RE.match(text)
    if not match:
        raise ParseError(f"expected 'm/n^e', got {text!r}")
    m, n, e = (int(g) for g in match.groups())
    return NAdic(n, m, e)


def parse_rational(text: str) -> Fraction:
    """Parse 'p/q', 'p', or the n-adic form 'm/n^e'."""
    if "^" in text:
        return parse_nadic(text).value
    match = _RAT_RE.match(text)
    if not match:
        raise ParseError(f"expected 'p/q', got {text!r}")
    p, q = match.groups()
    if q is not None and int(q) == 0:
        raise ParseError(f"zero denominator in {text!r}")
    return Fraction(int(p), int(q) if q else 1)


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_nadic(x: Fraction, n: int) -> str:
    nd = is_nadic(x, n)
    if nd is None:
        raise ValueError(f"{x} is not in Z[1/{n}]")
    return str(nd)
