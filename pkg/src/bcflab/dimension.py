"""Hausdorff-dimension brackets for hyperbolic Mobius systems.

For a system whose generators satisfy the open set condition, the roots of

    sum_{|w| = n} (inf |psi_w'|)^s = 1   and   sum_{|w| = n} (sup |psi_w'|)^s = 1

bracket the dimension of the limit set from below and above. Derivative
extrema are exact (``1/(c+d)^2`` and ``1/d^2`` for a composed matrix with
non-negative entries and determinant +-1), so only the final exponentials
need interval arithmetic.

Parabolic systems enter only through :func:`induce_parabolic`, which
replaces the neutral letter ``j`` by the generators ``j^m i`` (``i != j``,
``m <= cutoff``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import BudgetExceededError, EmptyAlphabetError, NoWordsError
from .ifs import (
    BCF_FAMILY,
    IfsFamily,
    Word,
    matrix_derivative_range,
    matrix_interval,
    word_matrix,
    words,
)
from .numeric import IV, DyadicInterval, MobiusMatrix, as_fraction, exp_enclosure, from_iv, log_enclosure, to_iv

DEFAULT_MAX_WORDS = 2_000_000
_GRID_BITS = 40


@dataclass(frozen=True)
class HyperbolicSystem:
    """Finite set of generator words over a family, each uniformly contracting."""

    family: IfsFamily
    generators: tuple[Word, ...]

    def __post_init__(self):
        gens = tuple(sorted({self.family.check_word(w) for w in self.generators}))
        if not gens:
            raise NoWordsError("a hyperbolic system needs at least one generator")
        object.__setattr__(self, "generators", gens)

    @property
    def matrices(self) -> tuple[MobiusMatrix, ...]:
        return tuple(word_matrix(self.family, w) for w in self.generators)

    def is_contracting(self) -> bool:
        return all(matrix_derivative_range(m)[1] < 1 for m in self.matrices)

    def has_disjoint_interiors(self) -> bool:
        ivs = sorted(matrix_interval(m) for m in self.matrices)
        return all(ivs[k][1] <= ivs[k + 1][0] for k in range(len(ivs) - 1))

    def has_disjoint_closures(self) -> bool:
        ivs = sorted(matrix_interval(m) for m in self.matrices)
        return all(ivs[k][1] < ivs[k + 1][0] for k in range(len(ivs) - 1))

    def validate(self) -> None:
        if not self.is_contracting():
            raise ValueError("a generator has sup |derivative| >= 1")
        if not self.has_disjoint_interiors():
            raise ValueError("generator intervals overlap")


@dataclass(frozen=True)
class DimensionBracket:
    s_lo: Fraction
    s_hi: Fraction
    depth: int
    tolerance: Fraction

    @property
    def width(self) -> Fraction:
        return self.s_hi - self.s_lo

    def contains(self, other: DimensionBracket, slack=0) -> bool:
        return self.s_lo - slack <= other.s_lo and other.s_hi <= self.s_hi + slack


def invariant_domain(system: HyperbolicSystem, iterations: int = 48,
                     bits: int = 32) -> tuple[Fraction, Fraction]:
    """A rational interval ``X`` with ``psi_g(X) inside X`` for every generator.

    Starts from [0, 1] and shrinks towards the hull of the limit set by
    ``X <- hull(union psi_g(X))``, rounding outward to a dyadic grid and
    keeping a step only if invariance is re-verified exactly.
    """
    mats = system.matrices
    scale = 1 << bits
    lo, hi = Fraction(0), Fraction(1)
    for _ in range(iterations):
        pts = [m(x) for m in mats for x in (lo, hi)]
        new_lo = Fraction(math.floor(min(pts) * scale), scale)
        new_hi = Fraction(math.ceil(max(pts) * scale), scale)
        new_lo, new_hi = max(new_lo, lo), min(new_hi, hi)
        if (new_lo, new_hi) == (lo, hi):
            break
        images = [m(x) for m in mats for x in (new_lo, new_hi)]
        if min(images) < new_lo or max(images) > new_hi:
            break
        lo, hi = new_lo, new_hi
    return lo, hi


def _resolve_domain(system: HyperbolicSystem, domain) -> tuple[Fraction, Fraction]:
    if domain is None or domain == "unit":
        return Fraction(0), Fraction(1)
    if domain == "hull":
        return invariant_domain(system)
    lo, hi = (as_fraction(v) for v in domain)
    if not 0 <= lo <= hi <= 1:
        raise ValueError("domain must be a subinterval of [0, 1]")
    for m in system.matrices:
        for x in (lo, hi):
            if not lo <= m(x) <= hi:
                raise ValueError("domain is not mapped into itself by every generator")
    return lo, hi


def _composed_scales(system: HyperbolicSystem, depth: int, max_words: int, domain=None):
    """Pairs ``(c u + d, c v + d)`` for every depth-``depth`` composition.

    On the invariant domain ``[u, v]`` (default [0, 1]) the derivative of a
    composed map with determinant +-1 ranges over ``[1/(c v + d)^2,
    1/(c u + d)^2]``. Order is lexicographic.
    """
    count = len(system.generators) ** depth
    if count > max_words:
        raise BudgetExceededError(f"{count} words at depth {depth} exceed the budget {max_words}")
    u, v = _resolve_domain(system, domain)
    mats = system.matrices
    out: list[tuple[Fraction, Fraction]] = []

    def walk(prefix: MobiusMatrix, level: int):
        if level == depth:
            if abs(prefix.det) != 1:
                raise ValueError("pressure sums assume determinant +-1 maps")
            c, d = prefix.m21, prefix.m22
            out.append((c * u + d, c * v + d))
            return
        for m in mats:
            walk(prefix @ m, level + 1)

    walk(MobiusMatrix.identity(), 0)
    return out


def _float_log(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


class _PressureSums:
    """Cached logs of derivative scales for repeated evaluation in ``s``."""

    def __init__(self, scales):
        self.sup_scale = [d for d, _ in scales]
        self.inf_scale = [cd for _, cd in scales]
        self.sup_log = np.array([_float_log(d) for d in self.sup_scale])
        self.inf_log = np.array([_float_log(cd) for cd in self.inf_scale])
        self._iv_cache: dict[Fraction, object] = {}

    def _iv_log(self, x: Fraction):
        v = self._iv_cache.get(x)
        if v is None:
            if x == 1:
                v = IV.mpf(0)
            else:
                v = IV.log(IV.mpf(x.numerator)) - IV.log(IV.mpf(x.denominator))
            self._iv_cache[x] = v
        return v

    def float_log_sum(self, s: float, which: str) -> float:
        logs = self.inf_log if which == "inf" else self.sup_log
        terms = -2.0 * s * logs
        top = terms.max()
        return float(top + math.log(np.exp(terms - top).sum()))

    def certified_sum(self, s: Fraction, which: str):
        """Interval for ``sum scale^(-2 s)``."""
        scales = self.inf_scale if which == "inf" else self.sup_scale
        s_iv = to_iv(s)
        total = IV.mpf(0)
        for x in scales:
            total += IV.exp(-2 * s_iv * self._iv_log(x))
        return total


def pressure_bounds(system: HyperbolicSystem, s, depth: int,
                    max_words: int = DEFAULT_MAX_WORDS, domain=None) -> tuple[DyadicInterval, DyadicInterval]:
    """Certified ``(1/n) log sum (inf|psi_w'|)^s`` and the same with ``sup``."""
    s = as_fraction(s)
    if not 0 <= s <= 1:
        raise ValueError("s must lie in [0, 1]")
    if depth < 1:
        raise ValueError("depth must be positive")
    sums = _PressureSums(_composed_scales(system, depth, max_words, domain))
    lo = IV.log(sums.certified_sum(s, "inf")) / depth
    hi = IV.log(sums.certified_sum(s, "sup")) / depth
    return from_iv(lo), from_iv(hi)


def _float_root(sums: _PressureSums, which: str) -> float:
    f = lambda s: sums.float_log_sum(s, which)
    upper = 1.0
    while f(upper) > 0:
        upper *= 2
        if upper > 1e6:
            raise ValueError("pressure does not decrease; system is not contracting")
    return brentq(f, 0.0, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _certify_lower(sums, guess: float, tol: Fraction) -> Fraction:
    scale = 1 << _GRID_BITS
    s = Fraction(math.floor((guess - float(tol) / 2) * scale), scale)
    while True:
        if s <= 0:
            return Fraction(0)
        total = sums.certified_sum(s, "inf")
        if total.a >= 1:
            return s
        s -= tol


def _certify_upper(sums, guess: float, tol: Fraction) -> Fraction:
    scale = 1 << _GRID_BITS
    s = Fraction(math.ceil((guess + float(tol) / 2) * scale), scale)
    while True:
        if s >= 1:
            return Fraction(1)
        total = sums.certified_sum(s, "sup")
        if total.b <= 1:
            return s
        s += tol


def dim_bounds(system: HyperbolicSystem, depth: int, tolerance=Fraction(1, 10**6),
               max_words: int = DEFAULT_MAX_WORDS, domain=None) -> DimensionBracket:
    """Certified bracket ``s_lo <= dim <= s_hi`` from depth-``depth`` words.

    Each end is a root located in floating point, then moved outward by half
    the tolerance and re-checked in interval arithmetic. ``domain`` selects
    where derivative extrema are taken: [0, 1] by default, ``"hull"`` for an
    automatically shrunk invariant interval (much tighter brackets), or an
    explicit rational pair.
    """
    tolerance = Fraction(tolerance)
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    if depth < 1:
        raise ValueError("depth must be positive")
    if len(system.generators) == 1:
        return DimensionBracket(Fraction(0), Fraction(0), depth, tolerance)
    sums = _PressureSums(_composed_scales(system, depth, max_words, domain))
    s_lo = _certify_lower(sums, _float_root(sums, "inf"), tolerance)
    s_hi = _certify_upper(sums, _float_root(sums, "sup"), tolerance)
    return DimensionBracket(s_lo, s_hi, depth, tolerance)


# ---------------------------------------------------------------------------
# parabolic acceleration


@dataclass(frozen=True)
class InducedSystem:
    system: HyperbolicSystem
    parabolic: int
    cutoff: int
    tail: tuple[tuple[int, Fraction], ...] = field(default=())

    @property
    def tail_defect(self) -> Fraction:
        """Largest ``sup |psi_w'|`` among the first discarded generators."""
        return self.tail[0][1] if self.tail else Fraction(0)


def induce_parabolic(alphabet: Sequence[int], cutoff: int, family: str = BCF_FAMILY,
                     tail_terms: int = 8) -> InducedSystem:
    """Generators ``j^m i`` (``0 <= m <= cutoff``, ``i`` non-parabolic).

    ``tail`` lists, for ``m = cutoff+1 .. cutoff+tail_terms``, the largest
    sup-derivative over ``i`` of the discarded words, so callers can bound
    the truncation error.
    """
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    fam = IfsFamily(family, tuple(alphabet))
    parabolic = fam.parabolic_letters()
    if len(parabolic) != 1:
        raise ValueError(f"expected exactly one parabolic letter, found {list(parabolic)}")
    j = parabolic[0]
    others = [i for i in fam.alphabet if i != j]
    if not others:
        raise EmptyAlphabetError("alphabet has only the parabolic letter")
    gens = [(j,) * m + (i,) for m in range(cutoff + 1) for i in others]
    tail = []
    for m in range(cutoff + 1, cutoff + 1 + tail_terms):
        sup = max(matrix_derivative_range(word_matrix(fam, (j,) * m + (i,)))[1] for i in others)
        tail.append((m, sup))
    return InducedSystem(HyperbolicSystem(fam, tuple(gens)), j, cutoff, tuple(tail))


# ---------------------------------------------------------------------------
# seed words


@dataclass(frozen=True)
class SeedSearchResult:
    p: int
    words: tuple[Word, ...]
    gamma: Fraction
    gamma_enclosure: DyadicInterval
    max_sup_derivative: Fraction
    dim_lower_bound: Fraction
    closed_disjoint: bool

    @property
    def system(self) -> HyperbolicSystem:
        return HyperbolicSystem(IfsFamily(BCF_FAMILY, _letters(self.words)), self.words)


def _letters(ws) -> tuple[int, ...]:
    return tuple(sorted({i for w in ws for i in w}))


def contraction_holds(max_sup: Fraction, gamma: Fraction, p: int) -> bool:
    """Certified ``max_sup < exp(-gamma p)``, i.e. ``max_sup * exp(gamma p) < 1``."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    return max_sup * exp_enclosure(gamma * p, 96).upper < 1


def search_seed_words(alphabet: Sequence[int], p: int, target_count: int | None = None,
                      family: str = BCF_FAMILY, depth: int = 1,
                      tolerance=Fraction(1, 10**6)) -> SeedSearchResult:
    """Length-``p`` words whose last letter is not parabolic.

    Distinct words of equal length have interiors that are disjoint by the
    open set condition (checked anyway); closures may still touch, which
    :attr:`SeedSearchResult.closed_disjoint` reports. ``gamma`` is a rational
    strictly below ``-(1/p) log max sup|psi_w'|`` so the contraction bound
    holds strictly; ``gamma_enclosure`` encloses the analytic value.
    """
    if p < 1:
        raise ValueError("p must be positive")
    fam = IfsFamily(family, tuple(alphabet))
    parabolic = set(fam.parabolic_letters())
    finals = [i for i in fam.alphabet if i not in parabolic]
    if not finals:
        raise NoWordsError("every letter is parabolic")
    chosen = [w for w in words(fam.alphabet, p) if w[-1] not in parabolic]
    sups = {w: matrix_derivative_range(word_matrix(fam, w))[1] for w in chosen}
    if target_count is not None and len(chosen) > target_count:
        if target_count < 1:
            raise ValueError("target_count must be positive")
        chosen = sorted(sorted(chosen, key=lambda w: sups[w])[:target_count])
    system = HyperbolicSystem(fam, tuple(chosen))
    if not system.has_disjoint_interiors():
        raise AssertionError("open set condition failed for seed words")
    max_sup = max(sups[w] for w in chosen)
    enc = log_enclosure(1 / max_sup)
    gamma_enc = DyadicInterval(enc.lower / p, enc.upper / p)
    scale = 1 << 64
    gamma = Fraction(math.floor(gamma_enc.lower * scale) - 1, scale)
    if not contraction_holds(max_sup, gamma, p):
        raise AssertionError("certified contraction check failed")
    dim_lo = dim_bounds(system, depth, tolerance).s_lo
    return SeedSearchResult(p, system.generators, gamma, gamma_enc, max_sup, dim_lo,
                            system.has_disjoint_closures())
