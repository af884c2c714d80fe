"""Exact arithmetic substrate.

Rationals are :class:`fractions.Fraction`. Irrational inputs are quadratic
surds ``(a + b*sqrt(d))/c``, which are closed under the Mobius steps used for
digit extraction. Transcendental quantities (logarithms and exponentials)
are only ever produced as certified enclosures with rational endpoints.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from mpmath import libmp
from mpmath.ctx_iv import MPIntervalContext

from .errors import RefinementBudgetExceeded

Rational = Fraction

# private interval context so callers' mpmath precision is never touched
IV = MPIntervalContext()
IV.prec = 160


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not re.fullmatch(r"[+-]?\d+(\s*/\s*\d+)?", text):
        raise ValueError(f"not an exact rational literal: {text!r}")
    value = Fraction(text.replace(" ", ""))
    return value


def format_fraction(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# quadratic surds


def _is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


@dataclass(frozen=True)
class QuadraticSurd:
    """The irrational number ``(a + b*sqrt(d)) / c``.

    Build through :func:`surd`, which normalizes and collapses ``b == 0`` to
    a :class:`Fraction`.
    """

    a: int
    b: int
    d: int
    c: int

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("surd denominator must be positive")
        if self.b == 0:
            raise ValueError("b == 0 is a rational; use surd() to build")
        if self.d <= 1 or _is_square(self.d):
            raise ValueError(f"d={self.d} must be a positive non-square")
        if math.gcd(math.gcd(self.a, self.b), self.c) != 1:
            raise ValueError("surd is not normalized")

    # -- exact predicates -------------------------------------------------

    def _numerator_sign(self) -> int:
        a, b, d = self.a, self.b, self.d
        if a == 0 or (a > 0) == (b > 0):
            return 1 if b > 0 else -1
        # opposite signs: compare a^2 with b^2 d (never equal, d non-square)
        if a * a > b * b * d:
            return 1 if a > 0 else -1
        return 1 if b > 0 else -1

    def sign(self) -> int:
        return self._numerator_sign()

    def __floor__(self) -> int:
        s = math.isqrt(self.b * self.b * self.d)
        # |b|*sqrt(d) lies strictly between s and s + 1
        n = self.a + s if self.b > 0 else self.a - s - 1
        return n // self.c

    def floor(self) -> int:
        return self.__floor__()

    def conjugate(self) -> QuadraticSurd:
        return QuadraticSurd(self.a, -self.b, self.d, self.c)

    def minimal_polynomial(self) -> tuple[int, int, int]:
        """Integer ``(A, B, C)`` with ``A x^2 + B x + C == 0``."""
        return (self.c * self.c, -2 * self.a * self.c, self.a * self.a - self.b * self.b * self.d)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, QuadraticSurd):
            if other.d != self.d:
                raise ValueError("surds with different radicands do not mix")
            return Fraction(other.a, other.c), Fraction(other.b, other.c)
        other = as_fraction(other)
        return other, Fraction(0)

    def _parts(self):
        return Fraction(self.a, self.c), Fraction(self.b, self.c)

    def __add__(self, other):
        if not isinstance(other, (QuadraticSurd, Fraction, int)):
            return NotImplemented
        x, y = self._parts()
        u, v = self._coerce(other)
        return _from_parts(x + u, y + v, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticSurd(-self.a, -self.b, self.d, self.c)

    def __sub__(self, other):
        if not isinstance(other, (QuadraticSurd, Fraction, int)):
            return NotImplemented
        x, y = self._parts()
        u, v = self._coerce(other)
        return _from_parts(x - u, y - v, self.d)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, (QuadraticSurd, Fraction, int)):
            return NotImplemented
        x, y = self._parts()
        u, v = self._coerce(other)
        return _from_parts(x * u + y * v * self.d, x * v + y * u, self.d)

    __rmul__ = __mul__

    def reciprocal(self):
        # 1/(x + y r) = (x - y r) / (x^2 - y^2 d)
        x, y = self._parts()
        norm = x * x - y * y * self.d
        return _from_parts(x / norm, -y / norm, self.d)

    def __truediv__(self, other):
        if isinstance(other, QuadraticSurd):
            return self * other.reciprocal()
        if not isinstance(other, (Fraction, int)):
            return NotImplemented
        return self * (1 / Fraction(other))

    def __rtruediv__(self, other):
        if not isinstance(other, (Fraction, int)):
            return NotImplemented
        return self.reciprocal() * other

    def __abs__(self):
        return self if self.sign() > 0 else -self

    # -- comparisons against rationals and surds ------------------------------

    def _cmp(self, other) -> int:
        diff = self - other
        if isinstance(diff, QuadraticSurd):
            return diff.sign()
        return (diff > 0) - (diff < 0)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if isinstance(other, QuadraticSurd):
            return (self.a, self.b, self.d, self.c) == (other.a, other.b, other.d, other.c)
        return False

    def __hash__(self):
        return hash((self.a, self.b, self.d, self.c))

    def __float__(self):
        return (self.a + self.b * math.sqrt(self.d)) / self.c

    def __str__(self):
        sign = "+" if self.b >= 0 else "-"
        return f"({self.a}{sign}{abs(self.b)}*sqrt({self.d}))/{self.c}"


def _from_parts(x: Fraction, y: Fraction, d: int):
    """``x + y*sqrt(d)`` from rational parts."""
    if y == 0:
        return x
    c = x.denominator * y.denominator // math.gcd(x.denominator, y.denominator)
    return surd(int(x * c), int(y * c), d, c)


def surd(a: int, b: int, d: int, c: int = 1):
    """Normalized ``(a + b*sqrt(d))/c``; returns a Fraction when irrationality vanishes."""
    if c == 0:
        raise ZeroDivisionError("surd denominator is zero")
    if d < 0:
        raise ValueError("radicand must be non-negative")
    if _is_square(d):
        return Fraction(a + b * math.isqrt(d), c)
    if b == 0:
        return Fraction(a, c)
    if c < 0:
        a, b, c = -a, -b, -c
    g = math.gcd(math.gcd(a, b), c)
    return QuadraticSurd(a // g, b // g, d, c // g)


_SURD_RE = re.compile(
    r"\(\s*([+-]?\d+)\s*([+-])\s*(\d+)\s*\*\s*sqrt\(\s*(\d+)\s*\)\s*\)\s*/\s*(\d+)"
)


def parse_surd(text: str):
    m = _SURD_RE.fullmatch(text.strip())
    if not m:
        raise ValueError(f"not a surd literal '(a+b*sqrt(d))/c': {text!r}")
    a, sgn, b, d, c = m.groups()
    b = int(b) if sgn == "+" else -int(b)
    if int(c) == 0:
        raise ValueError("surd denominator is zero")
    return surd(int(a), b, int(d), int(c))


def parse_real(text: str):
    """Parse a rational ``p/q`` / integer literal or a surd literal."""
    if "sqrt" in text:
        return parse_surd(text)
    return parse_rational(text)


ExactReal = Union[Fraction, int, QuadraticSurd]


# ---------------------------------------------------------------------------
# Mobius matrices


@dataclass(frozen=True)
class MobiusMatrix:
    m11: int
    m12: int
    m21: int
    m22: int

    def __post_init__(self):
        if self.det == 0:
            raise ValueError("singular Mobius matrix")

    @classmethod
    def identity(cls) -> MobiusMatrix:
        return cls(1, 0, 0, 1)

    @property
    def det(self) -> int:
        return self.m11 * self.m22 - self.m12 * self.m21

    def __matmul__(self, other: MobiusMatrix) -> MobiusMatrix:
        return MobiusMatrix(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )

    def __call__(self, x):
        num = self.m11 * x + self.m12
        den = self.m21 * x + self.m22
        if isinstance(num, int) and isinstance(den, int):
            return Fraction(num, den)
        return num / den

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.m11, self.m12, self.m21, self.m22)


def mobius_compose(left: MobiusMatrix, right: MobiusMatrix) -> MobiusMatrix:
    """Matrix of ``left o right``."""
    return left @ right


def product(matrices) -> MobiusMatrix:
    """Ordered product by binary splitting (balanced operand sizes)."""
    mats = list(matrices)
    if not mats:
        return MobiusMatrix.identity()
    while len(mats) > 1:
        paired = [mats[i] @ mats[i + 1] for i in range(0, len(mats) - 1, 2)]
        if len(mats) % 2:
            paired.append(mats[-1])
        mats = paired
    return mats[0]


# ---------------------------------------------------------------------------
# certified enclosures


@dataclass(frozen=True)
class DyadicInterval:
    """Closed interval with rational endpoints enclosing one real number."""

    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("empty interval")

    @classmethod
    def point(cls, x) -> DyadicInterval:
        x = as_fraction(x)
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def mid(self) -> Fraction:
        return (self.lower + self.upper) / 2

    def __float__(self):
        return float(self.mid)

    def __contains__(self, x) -> bool:
        return self.lower <= x <= self.upper

    def to_iv(self):
        return IV.mpf([_iv_point(self.lower).a, _iv_point(self.upper).b])

    def rounded(self, bits: int = 64) -> DyadicInterval:
        """Outward rounding onto the grid ``2**-bits``."""
        scale = 1 << bits
        lo = math.floor(self.lower * scale)
        hi = math.ceil(self.upper * scale)
        return DyadicInterval(Fraction(lo, scale), Fraction(hi, scale))

    def to_json(self, bits: int = 64) -> list[str]:
        r = self.rounded(bits) if self.lower != self.upper else self
        return [format_fraction(r.lower), format_fraction(r.upper)]


def _iv_point(x):
    x = as_fraction(x)
    if x.denominator == 1:
        return IV.mpf(x.numerator)
    return IV.mpf(x.numerator) / IV.mpf(x.denominator)


def to_iv(x):
    """Interval enclosure of an exact rational or an existing enclosure."""
    if isinstance(x, DyadicInterval):
        return x.to_iv()
    return _iv_point(x)


def from_iv(v) -> DyadicInterval:
    lo, hi = v._mpi_
    (a, b), (c, d) = libmp.to_rational(lo), libmp.to_rational(hi)
    return DyadicInterval(Fraction(int(a), int(b)), Fraction(int(c), int(d)))


def log_enclosure(x) -> DyadicInterval:
    """Certified enclosure of ``log(x)`` for rational ``x > 0``."""
    x = as_fraction(x)
    if x <= 0:
        raise ValueError("log of a non-positive number")
    if x == 1:
        return DyadicInterval.point(0)
    num = IV.log(IV.mpf(x.numerator)) if x.numerator > 1 else IV.mpf(0)
    den = IV.log(IV.mpf(x.denominator)) if x.denominator > 1 else IV.mpf(0)
    return from_iv(num - den)


def log_iv(x):
    """Interval ``log`` of a positive rational, as an interval-context value."""
    return log_enclosure(x).to_iv()


def exp_enclosure(x, bits: int = 64) -> DyadicInterval:
    """Directed-rounding enclosure of ``exp(x)`` for rational ``x >= 0``.

    Fixed-point Taylor series on ``x / 2**r <= 1/2`` followed by ``r``
    squarings; every step rounds the lower bound down and the upper bound
    up. The absolute width is roughly ``exp(x) * 2**(8 - bits)``.
    """
    x = as_fraction(x)
    if x < 0:
        raise ValueError("exp_enclosure expects x >= 0")
    if x == 0:
        return DyadicInterval.point(1)
    r = (x.numerator // x.denominator).bit_length() + 1
    prec = bits + 2 * r + 16
    one = 1 << prec
    den = x.denominator << r
    scaled = x.numerator << prec
    y_lo = scaled // den
    y_hi = -(-scaled // den)
    s_lo = s_hi = t_lo = t_hi = one
    k = 1
    while True:
        t_lo = (t_lo * y_lo) // (k << prec)
        t_hi = -(-(t_hi * y_hi) // (k << prec))
        s_lo += t_lo
        s_hi += t_hi
        k += 1
        if t_hi <= 1:
            break
    # remaining terms shrink by a factor <= 1/4 each, so their sum is < t_hi
    s_hi += t_hi + 1
    for _ in range(r):
        s_lo = (s_lo * s_lo) >> prec
        s_hi = -(-(s_hi * s_hi) >> prec)
    return DyadicInterval(Fraction(s_lo, one), Fraction(s_hi, one))


def floor_exp(lam, m: int, max_bits: int = 1 << 16) -> int:
    """Exact ``floor(exp(lam * m))`` for rational ``lam >= 0``.

    Precision doubles until the enclosure pins the floor. Raises
    :class:`RefinementBudgetExceeded` if the enclosure is already narrower
    than ``2**-128`` (or the bit budget is spent) and still straddles an
    integer.
    """
    lam = as_fraction(lam)
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if m < 0:
        raise ValueError("m must be >= 0")
    x = lam * m
    if x == 0:
        return 1
    bits = 64 + int(x * 3 // 2) + 1
    while True:
        enc = exp_enclosure(x, bits)
        lo, hi = math.floor(enc.lower), math.floor(enc.upper)
        if lo == hi:
            return lo
        if enc.width < Fraction(1, 1 << 128) or bits > max_bits:
            raise RefinementBudgetExceeded(
                f"exp({x}) is within {float(enc.width):.3g} of the integer {hi}"
            )
        bits *= 2


def best_rational_below(x: Fraction, max_den: int) -> Fraction:
    """Largest fraction ``<= x`` with denominator ``<= max_den``."""
    x = as_fraction(x)
    if x.denominator <= max_den:
        return x
    # continued-fraction walk; the last semiconvergent on the lower side wins
    p0, q0, p1, q1 = 0, 1, 1, 0
    n, d = x.numerator, x.denominator
    while True:
        a = n // d
        q2 = q0 + a * q1
        if q2 > max_den:
            break
        p0, q0, p1, q1 = p1, q1, p0 + a * p1, q2
        n, d = d, n - a * d
    k = (max_den - q0) // q1
    bound1 = Fraction(p0 + k * p1, q0 + k * q1)
    bound2 = Fraction(p1, q1)
    # bound1 and bound2 bracket x and are the best one-sided approximations
    return bound1 if bound1 <= x else bound2
