"""Mobius iterated function systems on [0, 1].

Two families share all code paths:

* ``BCF``:   ``psi_i(x) = 1 - 1/(x + i - 1)`` for letters ``i >= 2``,
  matrix ``[[1, i-2], [1, i-1]]`` (determinant 1);
* ``GAUSS``: ``phi_i(x) = 1/(x + i)`` for letters ``i >= 1``,
  matrix ``[[0, 1], [1, i]]`` (determinant -1).

A word ``w_1 ... w_n`` acts as ``psi_{w_1} o ... o psi_{w_n}``. Composed
matrices have non-negative entries, so ``|psi_w'(x)| = 1/(c x + d)^2`` is
monotone on [0, 1] and every extremum is an exact rational at an endpoint.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .numeric import DyadicInterval, MobiusMatrix, QuadraticSurd, as_fraction, log_enclosure, product

BCF_FAMILY = "BCF"
GAUSS_FAMILY = "GAUSS"

Word = tuple[int, ...]


@dataclass(frozen=True)
class IfsFamily:
    kind: str
    alphabet: tuple[int, ...]

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "alphabet", tuple(sorted(set(self.alphabet))))
        if kind not in (BCF_FAMILY, GAUSS_FAMILY):
            raise ValueError(f"unknown family {self.kind!r}")
        least = 2 if kind == BCF_FAMILY else 1
        if not self.alphabet:
            raise ValueError("alphabet is empty")
        if self.alphabet[0] < least:
            raise ValueError(f"{kind} letters must be >= {least}")

    def letter_matrix(self, letter: int) -> MobiusMatrix:
        return letter_matrix(self.kind, letter)

    def check_word(self, word: Sequence[int]) -> Word:
        word = tuple(word)
        if not word:
            raise ValueError("word must be non-empty")
        bad = set(word) - set(self.alphabet)
        if bad:
            raise ValueError(f"letters {sorted(bad)} are not in the alphabet {list(self.alphabet)}")
        return word

    def parabolic_letters(self) -> tuple[int, ...]:
        return tuple(i for i in self.alphabet if is_parabolic(self.letter_matrix(i)))


def letter_matrix(kind: str, letter: int) -> MobiusMatrix:
    if kind == BCF_FAMILY:
        if letter < 2:
            raise ValueError("BCF letters must be >= 2")
        return MobiusMatrix(1, letter - 2, 1, letter - 1)
    if letter < 1:
        raise ValueError("Gauss letters must be >= 1")
    return MobiusMatrix(0, 1, 1, letter)


def is_parabolic(m: MobiusMatrix) -> bool:
    """Whether ``m`` fixes a point of [0, 1] where ``|derivative| = 1``."""
    a, b, c, d = m.as_tuple()
    det = abs(m.det)
    if c == 0:
        # affine map with constant derivative |a/d|
        if abs(a) != abs(d):
            return False
        if a == d:
            return b == 0
        return 0 <= Fraction(b, 2 * d) <= 1
    # |m'(x)| = |det| / (c x + d)^2 = 1  <=>  c x + d = +-sqrt(det)
    for root in _int_sqrts(det):
        x = Fraction(root - d, c)
        if 0 <= x <= 1 and m(x) == x:
            return True
    return False


def _int_sqrts(n: int) -> list[int]:
    r = math.isqrt(n)
    return [r, -r] if r * r == n else []


def word_matrix(family: IfsFamily, word: Sequence[int]) -> MobiusMatrix:
    word = family.check_word(word)
    return product(family.letter_matrix(i) for i in word)


@dataclass(frozen=True)
class FundamentalInterval:
    word: Word
    lower: Fraction
    upper: Fraction

    @property
    def diameter(self) -> Fraction:
        return self.upper - self.lower

    def contains(self, other: FundamentalInterval) -> bool:
        return self.lower <= other.lower and other.upper <= self.upper

    def __str__(self):
        return f"{self.lower} {self.upper}"


def apply_word(family: IfsFamily, word: Sequence[int], x) -> Fraction:
    """Exact image of ``x`` under the composed map of ``word``."""
    m = word_matrix(family, word)
    if not isinstance(x, QuadraticSurd):
        x = as_fraction(x)
    return m(x)


def matrix_interval(m: MobiusMatrix) -> tuple[Fraction, Fraction]:
    lo, hi = m(Fraction(0)), m(Fraction(1))
    return (lo, hi) if lo <= hi else (hi, lo)


def fundamental_interval(family: IfsFamily, word: Sequence[int]) -> FundamentalInterval:
    word = family.check_word(word)
    lo, hi = matrix_interval(word_matrix(family, word))
    return FundamentalInterval(word, lo, hi)


def matrix_derivative_range(m: MobiusMatrix) -> tuple[Fraction, Fraction]:
    det = abs(m.det)
    at0 = Fraction(det, m.m22 ** 2)
    at1 = Fraction(det, (m.m21 + m.m22) ** 2)
    return (at0, at1) if at0 <= at1 else (at1, at0)


def matrix_diameter(m: MobiusMatrix) -> Fraction:
    """``|m(1) - m(0)| = |det| / (d (c + d))``."""
    return Fraction(abs(m.det), m.m22 * (m.m21 + m.m22))


def derivative_range(family: IfsFamily, word: Sequence[int]) -> tuple[Fraction, Fraction]:
    """Exact ``(min, max)`` of ``|psi_w'|`` over [0, 1]."""
    return matrix_derivative_range(word_matrix(family, word))


def derivative_at(family: IfsFamily, word: Sequence[int], x) -> Fraction:
    m = word_matrix(family, word)
    x = as_fraction(x)
    return abs(m.det) / (m.m21 * x + m.m22) ** 2


def distortion(family: IfsFamily, word: Sequence[int]) -> DyadicInterval:
    """Certified ``log(sup |psi_w'| / inf |psi_w'|)``."""
    lo, hi = derivative_range(family, word)
    return log_enclosure(hi / lo)


def interval_diameter(interval: FundamentalInterval) -> Fraction:
    return interval.upper - interval.lower


def words(alphabet: Iterable[int], length: int) -> Iterable[Word]:
    """All words of the given length in lexicographic order."""
    return itertools.product(sorted(alphabet), repeat=length)


def open_set_condition(family: IfsFamily, letters: Iterable[int] | None = None) -> bool:
    """Exact check that first-level intervals have pairwise disjoint interiors."""
    letters = family.alphabet if letters is None else tuple(letters)
    ivs = sorted(matrix_interval(family.letter_matrix(i)) for i in letters)
    return all(ivs[k][1] <= ivs[k + 1][0] for k in range(len(ivs) - 1))


def max_distortion(family: IfsFamily, n: int) -> tuple[Word, DyadicInterval]:
    """The statistic ``D_n``: worst distortion over all words of length ``n``."""
    best_word, best_ratio = None, None
    for w in words(family.alphabet, n):
        lo, hi = derivative_range(family, w)
        r = hi / lo
        if best_ratio is None or r > best_ratio:
            best_word, best_ratio = w, r
    return best_word, log_enclosure(best_ratio)


def dist_loc_ratio(family: IfsFamily, parabolic: int, n: int, letter: int, x) -> Fraction:
    """``|psi'_{j^n}(psi_i(x))| / |psi_{j^n}(1) - psi_{j^{n-1}}(1)|`` for parabolic ``j``.

    Bounded below uniformly in ``n`` for a parabolic system (local distortion
    near the neutral fixed point).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    jm = family.letter_matrix(parabolic)
    power = product([jm] * n)
    prev = product([jm] * (n - 1))
    y = family.letter_matrix(letter)(as_fraction(x))
    deriv = abs(power.det) / (power.m21 * y + power.m22) ** 2
    gap = abs(power(Fraction(1)) - prev(Fraction(1)))
    return deriv / gap
