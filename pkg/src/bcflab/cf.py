"""RCF and BCF expansions with their convergent tables.

Streams also read and write a small text or JSON file format.

Index conventions: ``digits[0]`` is the first partial quotient ``a_1``
(resp. ``b_1``); convergent tables keep the seed rows ``n = -1`` and ``n = 0``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import InsufficientDigitsError
from .numeric import MobiusMatrix, QuadraticSurd, as_fraction, product

RCF = "RCF"
BCF = "BCF"
KINDS = (RCF, BCF)


@dataclass(frozen=True)
class DigitStream:
    """An RCF or BCF expansion: integer part plus digits.

    ``terminated`` means the digits are the complete expansion of a rational.
    For a BCF stream of an integer ``x`` the convention is ``b0 = x`` with no
    digits; otherwise ``b0 = floor(x) + 1``.
    """

    kind: str
    integer_part: int
    digits: tuple[int, ...] = ()
    terminated: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be RCF or BCF, got {self.kind!r}")
        if not isinstance(self.digits, tuple):
            object.__setattr__(self, "digits", tuple(self.digits))
        if self.digits:
            least = 1 if self.kind == RCF else 2
            if min(self.digits) < least:
                raise ValueError(f"{self.kind} digits must be >= {least}")

    def __len__(self):
        return len(self.digits)

    def truncate(self, count: int) -> DigitStream:
        if count >= len(self.digits):
            return self
        return DigitStream(self.kind, self.integer_part, self.digits[:count], False)

    def value(self) -> Fraction:
        """Exact value of the finite expansion (the depth-``len`` truncation)."""
        x = None
        for d in reversed(self.digits):
            if x is None:
                x = Fraction(d)
            else:
                x = d + 1 / x if self.kind == RCF else d - 1 / x
        if x is None:
            return Fraction(self.integer_part)
        return self.integer_part + 1 / x if self.kind == RCF else self.integer_part - 1 / x

    # -- serialization ------------------------------------------------------

    def to_text(self) -> str:
        lines = [self.kind, str(self.integer_part)]
        lines.extend(map(str, self.digits))
        if self.terminated:
            lines.append(".")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        key = "a0" if self.kind == RCF else "b0"
        return {"kind": self.kind, key: self.integer_part, "digits": list(self.digits),
                "terminated": self.terminated}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, obj: dict) -> DigitStream:
        kind = str(obj["kind"]).upper()
        if "a0" in obj:
            ip = obj["a0"]
        elif "b0" in obj:
            ip = obj["b0"]
        else:
            ip = obj["integer_part"]
        return cls(kind, int(ip), tuple(int(d) for d in obj.get("digits", ())),
                   bool(obj.get("terminated", False)))

    @classmethod
    def from_text(cls, text: str) -> DigitStream:
        stripped = text.strip()
        if stripped.startswith("{"):
            return cls.from_dict(json.loads(stripped))
        lines = [ln.strip() for ln in stripped.splitlines() if ln.strip()]
        if len(lines) < 2:
            raise ValueError("digit stream needs a kind line and an integer-part line")
        terminated = lines[-1] == "."
        body = lines[2:-1] if terminated else lines[2:]
        return cls(lines[0].upper(), int(lines[1]), tuple(int(x) for x in body), terminated)


@dataclass(frozen=True)
class ConvergentTable:
    """Numerators and denominators for indices ``-1 .. N``."""

    kind: str
    numerators: tuple[int, ...]
    denominators: tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.numerators) - 2

    def p(self, n: int) -> int:
        if n < -1 or n > self.depth:
            raise IndexError(n)
        return self.numerators[n + 1]

    def q(self, n: int) -> int:
        if n < -1 or n > self.depth:
            raise IndexError(n)
        return self.denominators[n + 1]

    def convergent(self, n: int) -> Fraction:
        return Fraction(self.p(n), self.q(n))

    def rows(self) -> list[tuple[int, int]]:
        """``(numerator, denominator)`` for n = 0 .. depth."""
        return list(zip(self.numerators[1:], self.denominators[1:]))

    def convergents(self) -> list[Fraction]:
        return [Fraction(p, q) for p, q in self.rows()]


# ---------------------------------------------------------------------------
# digit extraction


def _check_source(x):
    if isinstance(x, (Fraction, int, QuadraticSurd)):
        return Fraction(x) if isinstance(x, int) else x
    if isinstance(x, str):
        from .numeric import parse_real
        return parse_real(x)
    raise TypeError(f"unsupported real source {type(x).__name__}")


def iter_rcf(x) -> Iterator[int]:
    """Yield ``a_0, a_1, ...`` by the Gauss step; stops for rationals."""
    x = _check_source(x)
    while True:
        a = math.floor(x)
        yield a
        frac = x - a
        if frac == 0:
            return
        x = 1 / frac


def iter_bcf(x) -> Iterator[int]:
    """Yield ``b_0, b_1, ...`` by the Renyi step ``b = floor(1/(1-y)) + 1``.

    When ``1/(1-y)`` is an integer the expansion stops with that digit.
    """
    x = _check_source(x)
    fl = math.floor(x)
    y = x - fl
    if y == 0:
        yield fl
        return
    yield fl + 1
    while True:
        z = 1 / (1 - y)
        if isinstance(z, Fraction) and z.denominator == 1:
            yield int(z)
            return
        fz = math.floor(z)
        yield fz + 1
        y = z - fz


def _expand(kind: str, x, count: int) -> DigitStream:
    if count < 1:
        raise ValueError("count must be positive")
    if isinstance(x, DigitStream):
        if x.kind == kind:
            return x.truncate(count)
        from .transform import bcf_to_rcf, rcf_to_bcf
        conv = bcf_to_rcf(x) if kind == RCF else rcf_to_bcf(x)
        return conv.truncate(count)
    gen = iter_rcf(x) if kind == RCF else iter_bcf(x)
    integer_part = next(gen)
    digits = []
    for d in gen:
        digits.append(d)
        if len(digits) == count:
            break
    else:
        return DigitStream(kind, integer_part, tuple(digits), True)
    # peek: a rational may end exactly at ``count`` digits
    terminated = next(gen, None) is None
    return DigitStream(kind, integer_part, tuple(digits), terminated)


def rcf_digits(x, count: int) -> DigitStream:
    """First ``count`` RCF partial quotients of ``x`` (any input accepted by :func:`as_source`)."""
    return _expand(RCF, x, count)


def bcf_digits(x, count: int) -> DigitStream:
    """First ``count`` BCF digits of ``x`` (any input accepted by :func:`as_source`)."""
    return _expand(BCF, x, count)


# ---------------------------------------------------------------------------
# convergents


def _table(kind: str, stream: DigitStream, count: int | None) -> ConvergentTable:
    if stream.kind != kind:
        raise ValueError(f"expected a {kind} stream, got {stream.kind}")
    if count is None:
        count = len(stream.digits)
    if count < 0:
        raise ValueError("count must be non-negative")
    if count > len(stream.digits):
        raise InsufficientDigitsError(
            f"{count} convergents requested but the stream has {len(stream.digits)} digits"
        )
    sign = 1 if kind == RCF else -1
    p = [1, stream.integer_part]
    q = [0, 1]
    for d in stream.digits[:count]:
        p.append(d * p[-1] + sign * p[-2])
        q.append(d * q[-1] + sign * q[-2])
    return ConvergentTable(kind, tuple(p), tuple(q))


def rcf_convergents(stream: DigitStream, count: int | None = None) -> ConvergentTable:
    """``p_n/q_n`` for n = -1..count from ``p_n = a_n p_{n-1} + p_{n-2}``."""
    return _table(RCF, stream, count)


def bcf_convergents(stream: DigitStream, count: int | None = None) -> ConvergentTable:
    """``r_n/s_n`` for n = -1..count from ``r_n = b_n r_{n-1} - r_{n-2}``."""
    return _table(BCF, stream, count)


def rcf_step(a: int) -> MobiusMatrix:
    return MobiusMatrix(a, 1, 1, 0)


def rcf_continuant(digits: Sequence[int]) -> MobiusMatrix:
    """``prod [[a_i, 1], [1, 0]]``; its first row is ``(q_n, q_{n-1})`` when ``a_0 = 0``.

    Binary splitting keeps long products (tens of thousands of quotients)
    quasi-linear.
    """
    return product(rcf_step(a) for a in digits)


def rcf_denominator(digits: Sequence[int]) -> int:
    """``q_n`` for the quotient prefix ``a_1..a_n`` (independent of ``a_0``)."""
    return rcf_continuant(digits).m11


def finite_value(kind: str, integer_part: int, digits: Iterable[int]) -> Fraction:
    return DigitStream(kind, integer_part, tuple(digits)).value()


def convergent_error_bounds(table: ConvergentTable, n: int) -> tuple[Fraction, Fraction]:
    """RCF bounds ``1/(q_n (q_n + q_{n+1}))`` and ``1/(q_n q_{n+1})`` on ``|x - p_n/q_n|``."""
    qn, qn1 = table.q(n), table.q(n + 1)
    return Fraction(1, qn * (qn + qn1)), Fraction(1, qn * qn1)


def as_source(value):
    """Coerce CLI/config values to an exact real source."""
    if isinstance(value, (DigitStream, QuadraticSurd, Fraction)):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return _check_source(value) if isinstance(value, str) else as_fraction(value)
