from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from bcflab.dimension import (
    HyperbolicSystem,
    dim_bounds,
    induce_parabolic,
    invariant_domain,
    pressure_bounds,
    search_seed_words,
)
from bcflab.errors import BudgetExceededError, EmptyAlphabetError, NoWordsError
from bcflab.ifs import BCF_FAMILY, GAUSS_FAMILY, IfsFamily, derivative_range, fundamental_interval
from bcflab.numeric import exp_enclosure, log_enclosure


def letters_system(kind, letters):
    return HyperbolicSystem(IfsFamily(kind, tuple(letters)), tuple((i,) for i in letters))


def bisect_root(f, lo=0, hi=1, steps=200):
    """Plain bisection at 60 digits on a decreasing function."""
    with mpmath.workdps(60):
        lo, hi = mpmath.mpf(lo), mpmath.mpf(hi)
        for _ in range(steps):
            mid = (lo + hi) / 2
            if f(mid) > 0:
                lo = mid
            else:
                hi = mid
        return lo


def f(x: Fraction) -> float:
    return float(x)


def test_pressure_examples():
    sys34 = letters_system(BCF_FAMILY, (3, 4))
    lo, hi = pressure_bounds(sys34, 0, 1)
    log2 = log_enclosure(2)
    assert lo.lower <= log2.upper and log2.lower <= lo.upper
    assert hi.lower <= log2.upper and log2.lower <= hi.upper
    lo, hi = pressure_bounds(sys34, Fraction(1, 2), 1)
    assert abs(f(hi.mid) - float(mpmath.log(mpmath.mpf(5) / 6))) < 1e-12
    assert abs(f(lo.mid) - float(mpmath.log(mpmath.mpf(7) / 12))) < 1e-12
    assert hi.width < Fraction(1, 10**10) and lo.width < Fraction(1, 10**10)


@given(st.integers(1, 3), st.fractions(min_value=0, max_value=1, max_denominator=64))
@settings(max_examples=30)
def test_pressure_lower_below_upper(depth, s):
    lo, hi = pressure_bounds(letters_system(BCF_FAMILY, (3, 4, 7)), s, depth)
    assert lo.upper <= hi.lower or lo.lower <= hi.upper
    assert lo.lower <= hi.upper


def test_pressure_strictly_decreasing_in_s():
    system = letters_system(BCF_FAMILY, (3, 5))
    grid = [Fraction(k, 16) for k in range(17)]
    values = [pressure_bounds(system, s, 2) for s in grid]
    for (lo_a, hi_a), (lo_b, hi_b) in zip(values, values[1:]):
        assert lo_b.upper < lo_a.lower and hi_b.upper < hi_a.lower


def test_bracket_matches_bisection_oracle():
    b = dim_bounds(letters_system(BCF_FAMILY, (3, 4)), 1, Fraction(1, 10**4))
    lo = bisect_root(lambda s: mpmath.mpf(1) / 9 ** s + mpmath.mpf(1) / 16 ** s - 1)
    hi = bisect_root(lambda s: mpmath.mpf(1) / 4 ** s + mpmath.mpf(1) / 9 ** s - 1)
    assert abs(f(b.s_lo) - float(lo)) < 1e-3 and abs(f(b.s_hi) - float(hi)) < 1e-3
    assert float(b.s_lo) <= float(lo) and float(hi) <= float(b.s_hi)


def test_single_generator_bracket():
    b = dim_bounds(letters_system(BCF_FAMILY, (3,)), 1)
    assert (b.s_lo, b.s_hi) == (0, 0)


@pytest.mark.parametrize("letters, kind", [((3, 4), BCF_FAMILY), ((3, 5, 6), BCF_FAMILY), ((1, 2), GAUSS_FAMILY)])
def test_brackets_nest_under_depth_doubling(letters, kind):
    system = letters_system(kind, letters)
    tol = Fraction(1, 10**6)
    for d in (1, 2, 4):
        outer, inner = dim_bounds(system, d, tol), dim_bounds(system, 2 * d, tol)
        assert outer.s_lo - tol <= inner.s_lo and inner.s_hi <= outer.s_hi + tol
        assert 0 <= inner.s_lo <= inner.s_hi <= 1


def test_gauss_bracket_on_invariant_hull():
    system = letters_system(GAUSS_FAMILY, (1, 2))
    u, v = invariant_domain(system)
    assert 0 < u < v < 1
    d8 = dim_bounds(system, 8, domain="hull")
    d12 = dim_bounds(system, 12, domain="hull")
    assert d8.width < Fraction(2, 100)
    assert d8.contains(d12)
    # the unit-interval bracket is valid too, only wider
    assert dim_bounds(system, 8).contains(d8)


def test_alphabet_monotonicity():
    small = dim_bounds(letters_system(BCF_FAMILY, (3, 4)), 2)
    large = dim_bounds(letters_system(BCF_FAMILY, (3, 4, 5)), 2)
    assert small.s_lo <= large.s_hi
    assert small.s_lo < large.s_lo


def test_word_budget():
    with pytest.raises(BudgetExceededError):
        dim_bounds(letters_system(BCF_FAMILY, (3, 4, 5)), 6, max_words=100)


def test_induced_generators():
    assert induce_parabolic((2, 3), 2).system.generators == ((2, 2, 3), (2, 3), (3,))
    assert induce_parabolic((2, 3), 0).system.generators == ((3,),)
    with pytest.raises(EmptyAlphabetError):
        induce_parabolic((2,), 3)


def test_induced_tail_sup_derivatives():
    fam = IfsFamily(BCF_FAMILY, (2, 3))
    sups = [derivative_range(fam, (2,) * m + (3,))[1] for m in range(0, 12)]
    assert sups[1] == Fraction(1, 9) and sups[3] == Fraction(1, 25)
    assert sups == [Fraction(1, (m + 2) ** 2) for m in range(12)]
    induced = induce_parabolic((2, 3), 4, tail_terms=5)
    assert [s for _, s in induced.tail] == sups[5:10]
    assert induced.tail_defect == Fraction(1, 49)


def test_induced_lower_bounds_increase_with_alphabet():
    lows = [dim_bounds(induce_parabolic(range(2, M + 1), 16).system, 1).s_lo for M in range(3, 9)]
    assert all(a < b for a, b in zip(lows, lows[1:]))


def test_seed_search_examples():
    r = search_seed_words((2, 3), 2)
    assert r.words == ((2, 3), (3, 3))
    log3 = log_enclosure(3)
    assert r.gamma_enclosure.lower <= log3.upper and log3.lower <= r.gamma_enclosure.upper
    assert r.gamma < log3.lower and log3.lower - r.gamma < Fraction(1, 2**60)
    assert r.max_sup_derivative == Fraction(1, 9)
    assert search_seed_words((3, 4), 1).words == ((3,), (4,))
    with pytest.raises(NoWordsError):
        search_seed_words((2,), 2)


@pytest.mark.parametrize("alphabet, p", [((2, 3), 2), ((2, 3, 4), 2), ((2, 3), 3), ((3, 4, 5), 2)])
def test_seed_conditions_hold_exactly(alphabet, p):
    r = search_seed_words(alphabet, p)
    fam = IfsFamily(BCF_FAMILY, alphabet)
    ivs = sorted((fundamental_interval(fam, w).lower, fundamental_interval(fam, w).upper) for w in r.words)
    assert all(a[1] <= b[0] for a, b in zip(ivs, ivs[1:]))
    assert all(w[-1] != 2 for w in r.words)
    bound = 1 / exp_enclosure(r.gamma * p, 96).upper
    assert all(derivative_range(fam, w)[1] < bound for w in r.words)
    assert 0 < r.dim_lower_bound < 1


def test_seed_target_count_keeps_most_contracting():
    r = search_seed_words((2, 3, 4), 2, target_count=3)
    assert len(r.words) == 3
    full = search_seed_words((2, 3, 4), 2)
    assert r.gamma >= full.gamma


def test_closed_intervals_may_touch():
    # p = 1 over {3, 4}: I(3) = [1/2, 2/3] and I(4) = [2/3, 3/4] share an endpoint
    assert search_seed_words((3, 4), 1).closed_disjoint is False
    assert search_seed_words((2, 3), 2).closed_disjoint is True
