"""Digit transformation between RCF and BCF expansions.

RCF quotients ``a_1, a_2, a_3, ...`` become the BCF digits
``(a_1 - 1) x 2, a_2 + 2, (a_3 - 1) x 2, a_4 + 2, ...`` with ``b_0 = a_0 + 1``.
Conversely, if ``n_1 < n_2 < ...`` are the positions of BCF digits ``>= 3``
(``n_0 = 0``), then ``a_{2k-1} = n_k - n_{k-1}`` and ``a_{2k} = b_{n_k} - 2``.

Finite (rational) expansions: the terminal convention matches
:func:`bcf_digits`. An RCF word of even length ``[.., a_n]`` is first
rewritten as ``[.., a_n - 1, 1]``; a terminated BCF word ending in a digit
``b >= 3`` closes with the quotient ``b - 1``, and one ending in ``j`` 2's
closes with ``j + 1``.
"""
from __future__ import annotations

from typing import Iterable, Iterator

from .cf import BCF, RCF, DigitStream
from .errors import AllTwosWindowError, InsufficientDigitsError, MalformedTailError


def iter_rcf_to_bcf(quotients: Iterable[int]) -> Iterator[int]:
    """Lazy BCF digits for an infinite RCF quotient stream ``a_1, a_2, ...``.

    A 2-block is emitted as soon as its odd-index quotient is read; the
    following ``a_{2k} + 2`` needs the next quotient.
    """
    it = iter(quotients)
    for odd in it:
        for _ in range(odd - 1):
            yield 2
        even = next(it, None)
        if even is None:
            return
        yield even + 2


def rcf_to_bcf(stream: DigitStream, bcf_count: int | None = None) -> DigitStream:
    if stream.kind != RCF:
        raise ValueError("rcf_to_bcf expects an RCF stream")
    a = list(stream.digits)
    if stream.terminated:
        if not a:
            return DigitStream(BCF, stream.integer_part, (), True)
        if a[-1] == 1:
            raise MalformedTailError("terminated RCF expansion ends with the quotient 1")
        if len(a) % 2 == 0:
            a[-1:] = [a[-1] - 1, 1]
        digits: list[int] = []
        for i in range(0, len(a) - 1, 2):
            digits.extend([2] * (a[i] - 1))
            digits.append(a[i + 1] + 2)
        digits.extend([2] * (a[-1] - 1))
        out = DigitStream(BCF, stream.integer_part + 1, tuple(digits), True)
        if bcf_count is not None:
            out = out.truncate(bcf_count)
        return out

    digits = []
    for b in iter_rcf_to_bcf(a):
        if bcf_count is not None and len(digits) == bcf_count:
            break
        digits.append(b)
    if bcf_count is not None and len(digits) < bcf_count:
        raise InsufficientDigitsError(
            f"RCF window yields only {len(digits)} of {bcf_count} BCF digits"
        )
    return DigitStream(BCF, stream.integer_part + 1, tuple(digits), False)


def bcf_to_rcf(stream: DigitStream, rcf_count: int | None = None) -> DigitStream:
    if stream.kind != BCF:
        raise ValueError("bcf_to_rcf expects a BCF stream")
    b = stream.digits
    if stream.terminated and not b:
        return DigitStream(RCF, stream.integer_part, (), True)
    quotients: list[int] = []
    prev = 0
    for pos, digit in enumerate(b, start=1):
        if digit >= 3:
            quotients.append(pos - prev)
            quotients.append(digit - 2)
            prev = pos
    trailing = len(b) - prev
    if stream.terminated:
        if trailing:
            quotients.append(trailing + 1)
        else:
            quotients[-1] += 1
        out = DigitStream(RCF, stream.integer_part - 1, tuple(quotients), True)
        if rcf_count is not None:
            out = out.truncate(rcf_count)
        return out

    if rcf_count is not None and rcf_count > len(quotients):
        if trailing or not b:
            raise AllTwosWindowError(
                f"window ends in {trailing} digit(s) equal to 2; "
                f"only {len(quotients)} RCF quotients are determined"
            )
        raise InsufficientDigitsError(
            f"BCF window determines {len(quotients)} of {rcf_count} RCF quotients"
        )
    if rcf_count is not None:
        quotients = quotients[:rcf_count]
    return DigitStream(RCF, stream.integer_part - 1, tuple(quotients), False)


def two_runs(digits: Iterable[int]) -> list[int]:
    """Lengths of maximal runs of 2 in order of appearance."""
    runs, cur = [], 0
    for d in digits:
        if d == 2:
            cur += 1
        elif cur:
            runs.append(cur)
            cur = 0
    if cur:
        runs.append(cur)
    return runs
