"""Building BCF digit streams with prescribed approximation behaviour.

Starting from a point ``y`` whose BCF digits concatenate words of a seed set
``W`` (all of length ``p``), a block of ``floor(exp(lambda M_k))`` 2's and a
single letter ``t`` are inserted after the ``M_k``-th seed digit for each
``k >= 0``. In the RCF expansion each such block collapses to one partial
quotient, and Good's criterion ``a_{n+1} > q_n^(alpha-2)`` can be checked
exactly at every insertion.

Positions are 1-based throughout: ``b_1`` is the first digit after ``b_0``.
Between ``n(k)`` and ``n(k+1)`` the stream holds ``m(k) p`` seed digits, the
k-th block of 2's and then ``t`` at position ``n(k+1)``.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .cf import BCF, DigitStream, rcf_denominator
from .diophantine import exceeds_threshold, parse_alpha
from .dimension import SeedSearchResult, contraction_holds
from .errors import BudgetExceededError, ConstructionError, InsufficientSeedError, ScheduleError
from .ifs import BCF_FAMILY, IfsFamily, Word, matrix_diameter, word_matrix
from .numeric import (
    DyadicInterval,
    as_fraction,
    best_rational_below,
    exp_enclosure,
    floor_exp,
    format_fraction,
    from_iv,
    log_enclosure,
    log_iv,
)
from .transform import bcf_to_rcf

PARABOLIC = 2
MAX_DENOMINATOR = 10**6
DEFAULT_LEVELS = 48


# ---------------------------------------------------------------------------
# schedule parameters


def _eq_c_log_term(L: int) -> DyadicInterval:
    """``2 log(sqrt(2) (L + 1)) = log(2 (L + 1)^2)``."""
    return log_enclosure(2 * (L + 1) ** 2)


def certify_eq_c(alpha, lam, L: int) -> bool:
    """Certified ``2(alpha-2) log(sqrt2 (L+1)) + (alpha-2) lambda <= lambda/2``."""
    alpha, lam = as_fraction(alpha), as_fraction(lam)
    if alpha <= 2 or lam <= 0:
        return False
    return (alpha - 2) * (_eq_c_log_term(L).upper + lam) <= lam / 2


def alpha_bound(lam, L: int) -> DyadicInterval:
    """Enclosure of the largest admissible ``alpha``, ``2 + lambda / (2 (log(2(L+1)^2) + lambda))``."""
    lam = as_fraction(lam)
    term = _eq_c_log_term(L)
    return DyadicInterval(2 + lam / (2 * (term.upper + lam)), 2 + lam / (2 * (term.lower + lam)))


def choose_alpha(lam, L: int, max_den: int = MAX_DENOMINATOR) -> Fraction:
    """Largest rational with denominator ``<= max_den`` satisfying the bound, certified."""
    lam = as_fraction(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if L < 1:
        raise ValueError("L must be >= 1")
    alpha = best_rational_below(alpha_bound(lam, L).lower, max_den)
    if not (alpha > 2 and certify_eq_c(alpha, lam, L)):
        raise ScheduleError("no admissible alpha at this denominator bound")
    return alpha


def m_condition_holds(M: Sequence[int]) -> bool:
    """``M_k >= max(sum_{i<k} M_i, M_{k-1}/2)`` for every ``k >= 1``."""
    total = 0
    for k, mk in enumerate(M):
        if k >= 1 and (mk < total or 2 * mk < M[k - 1]):
            return False
        total += mk
    return True


def minimal_m_sequence(p: int, count: int) -> tuple[int, ...]:
    """Greedy smallest positive ``m(i)`` keeping ``M_k = p sum_{i<=k} m(i)`` admissible."""
    if p < 1:
        raise ValueError("p must be positive")
    if count < 0:
        raise ValueError("count must be non-negative")
    m: list[int] = []
    M: list[int] = []
    for k in range(count):
        if k == 0:
            mk = 1
        else:
            need = max(sum(M), (M[-1] + 1) // 2)
            # M_k = M_{k-1} + p m(k) >= need
            mk = max(1, -(-(need - M[-1]) // p))
        m.append(mk)
        M.append((M[-1] if M else 0) + p * mk)
    return tuple(m)


def cumulative_M(p: int, m: Sequence[int]) -> tuple[int, ...]:
    out, total = [], 0
    for mi in m:
        total += p * mi
        out.append(total)
    return tuple(out)


@dataclass(frozen=True)
class InsertionSchedule:
    """Parameters of the insertion scheme; build with :meth:`make`."""

    alphabet: tuple[int, ...]
    words: tuple[Word, ...]
    p: int
    gamma: Fraction
    epsilon: Fraction
    lam: Fraction
    t: int
    L: int
    alpha: Fraction
    m: tuple[int, ...]
    certified: bool = True
    _n_cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @classmethod
    def make(cls, alphabet: Iterable[int], words: Iterable[Sequence[int]], p: int, gamma,
             epsilon=None, lam=None, t: int | None = None, alpha=None,
             m: Sequence[int] | None = None, levels: int = DEFAULT_LEVELS,
             certify: bool = True) -> InsertionSchedule:
        """Fill in defaults and validate.

        ``lam`` defaults to the largest rational with denominator ``<= 10^6``
        below ``epsilon gamma / 5``; if ``lam`` is given without ``epsilon``
        then ``epsilon = 5 lam / gamma``. ``alpha`` defaults to
        :func:`choose_alpha`; ``t`` to the smallest non-parabolic letter.
        ``certify=False`` skips the certified parameter inequalities and is
        meant for negative controls only.
        """
        alphabet = tuple(sorted(set(alphabet)))
        words = tuple(tuple(w) for w in words)
        gamma = as_fraction(gamma)
        if lam is None:
            if epsilon is None:
                raise ScheduleError("give epsilon or lambda")
            epsilon = as_fraction(epsilon)
            lam = best_rational_below(epsilon * gamma / 5, MAX_DENOMINATOR)
        else:
            lam = as_fraction(lam)
            if epsilon is None:
                if gamma <= 0:
                    raise ScheduleError("gamma must be positive")
                epsilon = 5 * lam / gamma
            else:
                epsilon = as_fraction(epsilon)
        if t is None:
            candidates = [i for i in alphabet if i != PARABOLIC]
            if not candidates:
                raise ScheduleError("alphabet has no non-parabolic letter")
            t = candidates[0]
        L = max(max(alphabet) - 2, p)
        if alpha is None:
            if certify and lam <= 0:
                raise ScheduleError("lambda = 0 forces alpha = 2; pass alpha with certify=False")
            alpha = choose_alpha(lam, L) if certify else None
            if alpha is None:
                raise ScheduleError("alpha is required when certification is off")
        else:
            alpha = parse_alpha(alpha)
        if m is None:
            m = minimal_m_sequence(p, levels)
        sched = cls(alphabet, words, p, gamma, epsilon, lam, t, L, alpha, tuple(m), certify)
        sched.validate()
        return sched

    @classmethod
    def from_seed(cls, seed: SeedSearchResult, alphabet: Iterable[int], **kwargs) -> InsertionSchedule:
        return cls.make(alphabet, seed.words, seed.p, seed.gamma, **kwargs)

    def validate(self) -> None:
        if PARABOLIC not in self.alphabet:
            raise ScheduleError("the alphabet must contain the parabolic letter 2")
        if min(self.alphabet) < 2:
            raise ScheduleError("BCF letters must be >= 2")
        if self.t == PARABOLIC or self.t not in self.alphabet:
            raise ScheduleError("t must be a letter of the alphabet other than 2")
        if not self.words:
            raise ScheduleError("no seed words")
        for w in self.words:
            if len(w) != self.p:
                raise ScheduleError(f"seed word {w} does not have length p = {self.p}")
            if not set(w) <= set(self.alphabet):
                raise ScheduleError(f"seed word {w} leaves the alphabet")
            if w[-1] == PARABOLIC:
                raise ScheduleError(f"seed word {w} ends with the parabolic letter")
        if len(set(self.words)) != len(self.words):
            raise ScheduleError("seed words must be distinct")
        if not self.m or min(self.m) < 1:
            raise ScheduleError("m(i) must be positive integers")
        if self.lam < 0 or self.epsilon <= 0:
            raise ScheduleError("lambda must be >= 0 and epsilon > 0")
        if self.L != max(max(self.alphabet) - 2, self.p):
            raise ScheduleError("L must equal max(max alphabet - 2, p)")
        if not m_condition_holds(self.M):
            raise ScheduleError("the sequence M_k violates M_k >= max(sum M_i, M_(k-1)/2)")
        if self.certified:
            if self.gamma <= 0:
                raise ScheduleError("gamma must be positive")
            family = IfsFamily(BCF_FAMILY, self.alphabet)
            sup = max(_sup_derivative(family, w) for w in self.words)
            if not contraction_holds(sup, self.gamma, self.p):
                raise ScheduleError("seed words do not contract by exp(-gamma p)")
            if self.lam > self.epsilon * self.gamma / 5:
                raise ScheduleError("lambda exceeds epsilon gamma / 5")
            if not certify_eq_c(self.alpha, self.lam, self.L):
                raise ScheduleError("alpha, lambda and L violate the admissibility inequality")

    @property
    def M(self) -> tuple[int, ...]:
        return cumulative_M(self.p, self.m)

    @property
    def levels(self) -> int:
        return len(self.m)

    def block_length(self, k: int) -> int:
        return floor_exp(self.lam, self.M[k])

    def n(self, k: int) -> int:
        """``n(0) = 0``, ``n(k) = n(k-1) + m(k-1) p + floor(exp(lambda M_{k-1})) + 1``."""
        if k < 0 or k > self.levels:
            raise IndexError(k)
        cache = self._n_cache
        if k in cache:
            return cache[k]
        value = 0 if k == 0 else self.n(k - 1) + self.m[k - 1] * self.p + self.block_length(k - 1) + 1
        cache[k] = value
        return value

    def B(self, k: int) -> tuple[int, ...]:
        """``B_k = {n(k) + j p : 0 <= j <= m(k)}`` (includes 0 when ``k = 0``)."""
        return tuple(self.n(k) + j * self.p for j in range(self.m[k] + 1))

    def to_dict(self) -> dict:
        return {
            "alphabet": list(self.alphabet),
            "words": [list(w) for w in self.words],
            "p": self.p,
            "gamma": format_fraction(self.gamma),
            "epsilon": format_fraction(self.epsilon),
            "lambda": format_fraction(self.lam),
            "t": self.t,
            "L": self.L,
            "alpha": format_fraction(self.alpha),
            "certified": self.certified,
        }


def _sup_derivative(family: IfsFamily, word: Word) -> Fraction:
    m = word_matrix(family, word)
    # BCF composed matrices have non-negative entries and determinant 1
    return Fraction(1, m.m22 ** 2)


# ---------------------------------------------------------------------------
# seed sources


def periodic_seed(pattern: Sequence[int]) -> Iterator[int]:
    """Cycle through word indices forever."""
    if not pattern:
        raise ValueError("empty seed pattern")
    while True:
        yield from pattern


def random_seed(word_count: int, seed: int) -> Iterator[int]:
    """Reproducible pseudorandom word indices."""
    rng = random.Random(seed)
    while True:
        yield rng.randrange(word_count)


def parse_seed_pattern(text: str, word_count: int) -> Iterator[int]:
    """``"0,1"`` cycles the listed indices; ``"random:SEED"`` draws them."""
    text = text.strip()
    if text.startswith("random:"):
        return random_seed(word_count, int(text.split(":", 1)[1]))
    idx = [int(v) for v in text.split(",") if v.strip()]
    if not idx or min(idx) < 0 or max(idx) >= word_count:
        raise ValueError(f"seed pattern indices must lie in 0..{word_count - 1}")
    return periodic_seed(idx)


# ---------------------------------------------------------------------------
# construction


@dataclass(frozen=True)
class Insertion:
    k: int
    M: int
    start: int
    block_len: int
    t_position: int
    complete: bool

    def to_dict(self) -> dict:
        return {"k": self.k, "M": self.M, "position": self.start, "blockLen": self.block_len,
                "tPosition": self.t_position, "complete": self.complete}


@dataclass(frozen=True)
class ConstructedStream:
    schedule: InsertionSchedule
    seed_indices: tuple[int, ...]
    stream: DigitStream
    insertions: tuple[Insertion, ...]

    @property
    def digits(self) -> tuple[int, ...]:
        return self.stream.digits

    @property
    def seed_digits(self) -> tuple[int, ...]:
        words = self.schedule.words
        return tuple(d for i in self.seed_indices for d in words[i])

    @property
    def complete_insertions(self) -> tuple[Insertion, ...]:
        return tuple(ins for ins in self.insertions if ins.complete)

    def inserted_positions(self) -> Iterator[int]:
        """1-based positions of inserted digits (blocks of 2 and the letters ``t``)."""
        for ins in self.insertions:
            end = ins.t_position if ins.complete else len(self.digits)
            yield from range(ins.start, end + 1)


def build_stream(seed_source: Iterable[int], schedule: InsertionSchedule,
                 digit_count: int) -> ConstructedStream:
    """First ``digit_count`` BCF digits of ``x(y)`` (with ``b_0 = 1``).

    ``seed_source`` yields indices into ``schedule.words``. The last block of
    2's is truncated at the digit budget and logged as incomplete.
    """
    if digit_count < 1:
        raise ValueError("digit_count must be positive")
    words = schedule.words
    it = iter(seed_source)
    digits: list[int] = []
    used: list[int] = []
    log: list[Insertion] = []
    for k in range(schedule.levels):
        for _ in range(schedule.m[k]):
            if len(digits) >= digit_count:
                break
            try:
                idx = next(it)
            except StopIteration:
                raise InsufficientSeedError(f"seed ran out after {len(used)} words") from None
            if not 0 <= idx < len(words):
                raise ConstructionError(f"seed index {idx} out of range")
            used.append(idx)
            digits.extend(words[idx])
        if len(digits) >= digit_count:
            break
        blen = schedule.block_length(k)
        start = len(digits) + 1
        room = digit_count - len(digits)
        if blen + 1 <= room:
            digits.extend([PARABOLIC] * blen)
            digits.append(schedule.t)
            log.append(Insertion(k, schedule.M[k], start, blen, len(digits), True))
        else:
            digits.extend([PARABOLIC] * min(blen, room))
            log.append(Insertion(k, schedule.M[k], start, blen, start + blen, False))
            break
    else:
        if len(digits) < digit_count:
            raise ScheduleError("schedule has too few levels for the digit budget")
    # a seed word may overshoot the budget
    del digits[digit_count:]
    stream = DigitStream(BCF, 1, tuple(digits), False)
    return ConstructedStream(schedule, tuple(used), stream, tuple(log))


def elide(constructed: ConstructedStream, upto: int | None = None) -> tuple[int, ...]:
    """Digits ``b_1..b_upto`` with every inserted digit removed."""
    digits = constructed.digits if upto is None else constructed.digits[:upto]
    drop = set(constructed.inserted_positions())
    return tuple(d for pos, d in enumerate(digits, start=1) if pos not in drop)


def not2_positions(constructed: ConstructedStream, k: int) -> tuple[int, ...]:
    """Positions of ``B_k`` (1-based, the empty ``b_0`` slot dropped) after checking none holds a 2."""
    sched = constructed.schedule
    positions = tuple(n for n in sched.B(k) if n >= 1)
    if positions and positions[-1] > len(constructed.digits):
        raise BudgetExceededError(f"B_{k} reaches beyond the materialized digits")
    for n in positions:
        if constructed.digits[n - 1] == PARABOLIC:
            raise AssertionError(f"digit at position {n} of B_{k} is 2")
    return positions


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class GoodRow:
    k: int
    n: int
    a_next: int
    block_len: int
    q_n: int
    passed: bool
    product_bound: int
    product_bound_holds: bool
    growth_bound_holds: bool

    def to_dict(self) -> dict:
        return {"k": self.k, "n": self.n, "aNext": self.a_next, "blockLen": self.block_len,
                "qn": str(self.q_n), "pass": self.passed,
                "productBoundHolds": self.product_bound_holds,
                "growthBoundHolds": self.growth_bound_holds}


@dataclass(frozen=True)
class GoodReport:
    alpha: Fraction
    rows: tuple[GoodRow, ...]
    reachable_k: int

    @property
    def first_pass_k(self) -> int | None:
        """Smallest ``k`` from which every verified insertion passes."""
        first = None
        for row in self.rows:
            if row.passed:
                if first is None:
                    first = row.k
            else:
                first = None
        return first

    def to_dict(self) -> dict:
        return {"alpha": format_fraction(self.alpha), "reachableK": self.reachable_k,
                "firstPassK": self.first_pass_k, "rows": [r.to_dict() for r in self.rows]}


def rcf_quotients(constructed: ConstructedStream, upto: int) -> tuple[int, ...]:
    """RCF quotients determined by ``b_1..b_upto`` (which must end in a digit >= 3)."""
    prefix = DigitStream(BCF, 1, constructed.digits[:upto], False)
    return bcf_to_rcf(prefix).digits


def verify_good(constructed: ConstructedStream, k_max: int | None = None,
                budget: int = 10**7, alpha=None) -> GoodReport:
    """Check Good's inequality at the RCF quotient of each complete insertion.

    If ``j`` digits ``>= 3`` occur in ``b_1..b_{n(k+1)}`` (the last being ``t``)
    the block of 2's before ``t`` becomes the quotient ``a_{2j-1}``, so
    ``n = 2j - 2``. Alongside the exact test the report checks two upper
    bounds on ``q_n``: the product ``(L+1)^n prod_{i<k}(floor(exp(lambda M_i))+1)``
    and the certified ``(L+1)^n 2^k exp(lambda sum_{i<k} M_i)``.
    """
    sched = constructed.schedule
    alpha = sched.alpha if alpha is None else parse_alpha(alpha)
    rows: list[GoodRow] = []
    complete = constructed.complete_insertions
    if k_max is not None:
        complete = tuple(ins for ins in complete if ins.k <= k_max)
    if not complete:
        return GoodReport(alpha, (), -1)
    last = complete[-1].t_position
    if last > budget:
        raise BudgetExceededError(f"verification needs {last} digits, budget is {budget}")
    quotients = rcf_quotients(constructed, last)
    big_count = 0
    big_at = {}
    for pos, d in enumerate(constructed.digits[:last], start=1):
        if d >= 3:
            big_count += 1
            big_at[pos] = big_count
    prod = 1
    M_sum = 0
    for ins in complete:
        j = big_at[ins.t_position]
        n = 2 * j - 2
        a_next = quotients[n]
        if a_next != ins.block_len + 1:
            raise ConstructionError(f"quotient {a_next} at k={ins.k} does not match block {ins.block_len}")
        q_n = rcf_denominator(quotients[:n])
        base = (sched.L + 1) ** n
        product_bound = base * prod
        growth = exp_enclosure(sched.lam * M_sum, 64).lower if M_sum else Fraction(1)
        rows.append(GoodRow(
            k=ins.k, n=n, a_next=a_next, block_len=ins.block_len, q_n=q_n,
            passed=exceeds_threshold(a_next, q_n, alpha),
            product_bound=product_bound,
            product_bound_holds=q_n <= product_bound,
            growth_bound_holds=q_n <= base * 2 ** ins.k * growth,
        ))
        prod *= ins.block_len + 1
        M_sum += ins.M
    return GoodReport(alpha, tuple(rows), complete[-1].k)


# ---------------------------------------------------------------------------
# diameter comparison


@dataclass(frozen=True)
class HolderRow:
    k: int
    n: int
    log_diameter: DyadicInterval
    log_elided_diameter: DyadicInterval
    margin: DyadicInterval

    @property
    def passed(self) -> bool:
        """``|I| >= |I_bar|^(1+eps)`` certified, i.e. the margin is ``>= 0``."""
        return self.margin.lower >= 0

    def to_dict(self) -> dict:
        return {"k": self.k, "n": self.n, "margin": self.margin.to_json(),
                "marginDecimal": f"{float(self.margin):.9f}", "pass": self.passed}


@dataclass(frozen=True)
class HolderReport:
    epsilon: Fraction
    rows: tuple[HolderRow, ...]

    def min_margin_by_k(self) -> dict[int, DyadicInterval]:
        out: dict[int, DyadicInterval] = {}
        for row in self.rows:
            cur = out.get(row.k)
            if cur is None or row.margin.lower < cur.lower:
                out[row.k] = row.margin
        return dict(sorted(out.items()))

    @property
    def monotone(self) -> bool:
        """Per-``k`` worst margins never decrease (empirical, on this sample)."""
        mins = [m.lower for m in self.min_margin_by_k().values()]
        return all(a <= b for a, b in zip(mins, mins[1:]))

    @property
    def monotone_from(self) -> int | None:
        """Smallest sampled ``k`` from which the per-``k`` worst margins never decrease."""
        items = list(self.min_margin_by_k().items())
        if not items:
            return None
        start = items[-1][0]
        for (k0, a), (_, b) in zip(reversed(items[:-1]), reversed(items[1:])):
            if a.lower > b.lower:
                break
            start = k0
        return start

    @property
    def empirical_k_bar(self) -> int | None:
        ks = sorted({r.k for r in self.rows})
        bar = None
        for k in ks:
            if all(r.passed for r in self.rows if r.k == k):
                if bar is None:
                    bar = k
            else:
                bar = None
        return bar

    def to_dict(self) -> dict:
        return {"epsilon": format_fraction(self.epsilon), "empiricalKBar": self.empirical_k_bar,
                "monotone": self.monotone,
                "monotoneFrom": self.monotone_from, "rows": [r.to_dict() for r in self.rows]}


def _log_diameter(family: IfsFamily, word: Sequence[int]) -> DyadicInterval:
    diam = matrix_diameter(word_matrix(family, word))
    return from_iv(-log_iv(Fraction(diam.denominator, diam.numerator)))


def holder_check(schedule: InsertionSchedule, seed_sources: Iterable[Iterable[int]],
                 k_range: Iterable[int], epsilon=None, budget: int = 10**6) -> HolderReport:
    """Margins ``log|I(b_1..b_n)| - (1+eps) log|I_bar(b_1..b_n)|`` for ``n`` in ``B_k``.

    ``I_bar`` drops every inserted digit up to ``n``. A margin ``>= 0`` means
    the diameter inequality holds for that prefix.
    """
    eps = schedule.epsilon if epsilon is None else as_fraction(epsilon)
    k_list = sorted(set(k_range))
    if not k_list:
        return HolderReport(eps, ())
    k_top = k_list[-1]
    need = schedule.n(k_top) + schedule.m[k_top] * schedule.p
    if need > budget:
        raise BudgetExceededError(f"B_{k_top} needs {need} digits, budget is {budget}")
    family = IfsFamily(BCF_FAMILY, schedule.alphabet)
    rows: list[HolderRow] = []
    for source in seed_sources:
        constructed = build_stream(source, schedule, need)
        for k in k_list:
            for n in schedule.B(k):
                if n < 1:
                    continue
                word = constructed.digits[:n]
                bar = elide(constructed, n)
                log_i = _log_diameter(family, word)
                log_bar = _log_diameter(family, bar)
                margin = DyadicInterval(log_i.lower - (1 + eps) * log_bar.upper,
                                        log_i.upper - (1 + eps) * log_bar.lower)
                rows.append(HolderRow(k, n, log_i.rounded(), log_bar.rounded(), margin.rounded()))
    return HolderReport(eps, tuple(rows))


def report_json(constructed: ConstructedStream, verification: GoodReport | None) -> str:
    doc = {
        "schedule": constructed.schedule.to_dict(),
        "insertions": [ins.to_dict() for ins in constructed.insertions],
        "verification": [] if verification is None else [r.to_dict() for r in verification.rows],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))
