from fractions import Fraction
from itertools import islice

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from bcflab.cf import RCF, DigitStream
from bcflab.dimension import search_seed_words
from bcflab.diophantine import good_hits
from bcflab.errors import BudgetExceededError, InsufficientSeedError, ScheduleError
from bcflab.jarnik import (
    InsertionSchedule,
    alpha_bound,
    build_stream,
    certify_eq_c,
    choose_alpha,
    cumulative_M,
    elide,
    holder_check,
    m_condition_holds,
    minimal_m_sequence,
    not2_positions,
    parse_seed_pattern,
    periodic_seed,
    random_seed,
    rcf_quotients,
    verify_good,
)

ALPHA = Fraction(121, 60)  # 2 + 1/60


@pytest.fixture(scope="module")
def seed23():
    return search_seed_words((2, 3), 2)


@pytest.fixture(scope="module")
def schedule(seed23):
    return InsertionSchedule.from_seed(seed23, (2, 3), lam=Fraction(1, 10), t=3, alpha=ALPHA)


@pytest.fixture(scope="module")
def big_stream(schedule):
    return build_stream(periodic_seed([0, 1]), schedule, 10**6)


def mp(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


def analytic_alpha(lam, L):
    with mpmath.workdps(50):
        lam = mpmath.mpf(lam.numerator) / lam.denominator
        return 2 + lam / (2 * (2 * mpmath.log(mpmath.sqrt(2) * (L + 1)) + lam))


@pytest.mark.parametrize("lam", [Fraction(1, 10), Fraction(1), Fraction(1, 1000), Fraction(7, 3)])
@pytest.mark.parametrize("L", [1, 2, 5])
def test_choose_alpha_against_closed_form(lam, L):
    alpha = choose_alpha(lam, L)
    exact = analytic_alpha(lam, L)
    with mpmath.workdps(50):
        assert 2 < alpha and mp(alpha) < exact
        assert alpha.denominator <= 10**6
        assert certify_eq_c(alpha, lam, L)
        bound = alpha_bound(lam, L)
        assert mp(bound.lower) <= exact <= mp(bound.upper)
        assert exact - mp(alpha) < mpmath.mpf(10) ** -6


def test_choose_alpha_examples():
    assert abs(float(choose_alpha(Fraction(1, 10), 2)) - 2.01672) < 1e-5
    assert certify_eq_c(ALPHA, Fraction(1, 10), 2)
    assert not certify_eq_c(Fraction(203, 100), Fraction(1, 10), 2)
    assert abs(float(analytic_alpha(Fraction(1), 2)) - 2.12852) < 1e-5
    tiny = [choose_alpha(Fraction(1, 10**j), 2) for j in (1, 2, 3, 4)]
    assert all(a > b for a, b in zip(tiny, tiny[1:]))
    assert tiny[-1] - 2 < Fraction(1, 10**4)


def test_minimal_m_sequence():
    assert minimal_m_sequence(2, 5) == (1, 1, 1, 3, 6)
    assert cumulative_M(2, (1, 1, 1, 3, 6)) == (2, 4, 6, 12, 24)
    m6 = minimal_m_sequence(2, 6)
    assert m6[5] == 12 and cumulative_M(2, m6)[5] == 48


@given(st.integers(2, 6), st.integers(2, 14))
def test_minimal_m_is_greedy_minimal(p, count):
    m = minimal_m_sequence(p, count)
    M = cumulative_M(p, m)
    assert m_condition_holds(M)
    for k in range(1, count):
        if m[k] > 1:
            lowered = M[:k] + (M[k] - p,)
            assert not m_condition_holds(lowered)


def test_schedule_recurrences(schedule):
    assert schedule.L == 2 and schedule.t == 3
    assert schedule.M[:8] == (2, 4, 6, 12, 24, 48, 96, 192)
    assert [schedule.block_length(k) for k in range(6)] == [1, 1, 1, 3, 11, 121]
    assert [schedule.n(k) for k in range(8)] == [0, 4, 8, 12, 22, 46, 192, 15005]
    for k in range(7):
        assert max(schedule.B(k)) < schedule.n(k + 1)


def test_default_lambda_is_epsilon_gamma_over_five(seed23):
    s = InsertionSchedule.from_seed(seed23, (2, 3), epsilon=1)
    assert s.lam <= seed23.gamma / 5 and seed23.gamma / 5 - s.lam < Fraction(1, 10**6)
    s2 = InsertionSchedule.from_seed(seed23, (2, 3), lam=Fraction(1, 10))
    assert s2.epsilon * seed23.gamma / 5 == Fraction(1, 10)


def test_first_insertion(schedule):
    c = build_stream(periodic_seed([0, 1]), schedule, 40)
    assert c.digits[:4] == (2, 3, 2, 3)
    first = c.insertions[0]
    assert (first.M, first.block_len, first.t_position) == (2, 1, 4)
    assert schedule.n(1) == 4
    k4 = [ins for ins in c.insertions if ins.k == 4][0]
    assert k4.block_len == 11 and not k4.complete


def test_degenerate_lambda_zero(seed23):
    s = InsertionSchedule.make((2, 3), seed23.words, 2, seed23.gamma, lam=0, epsilon=1,
                               alpha=Fraction(201, 100), certify=False)
    c = build_stream(periodic_seed([0, 1]), s, 200)
    assert all(ins.block_len == 1 for ins in c.insertions)
    seed = list(c.seed_digits)
    expected, pos = [], 0
    for k, M in enumerate(s.M):
        expected += seed[pos:M] + [2, 3]
        pos = M
        if len(expected) >= 200:
            break
    assert list(c.digits) == expected[:200]


def test_insufficient_seed(schedule):
    with pytest.raises(InsufficientSeedError):
        build_stream([0, 1, 0], schedule, 100)


def test_verify_good_end_to_end(big_stream):
    report = verify_good(big_stream)
    assert report.reachable_k == 6
    assert [r.n for r in report.rows] == [2, 8, 12, 24, 44, 82, 156]
    assert [r.a_next for r in report.rows] == [2, 2, 2, 4, 12, 122, 14765]
    assert all(r.passed and r.product_bound_holds and r.growth_bound_holds for r in report.rows)
    assert report.first_pass_k == 0


def test_block_law_in_rcf(big_stream):
    report = verify_good(big_stream)
    ins = {i.k: i for i in big_stream.complete_insertions}
    for r in report.rows:
        assert r.a_next == ins[r.k].block_len + 1


def test_membership_cross_check_with_good_hits(big_stream, schedule):
    report = verify_good(big_stream)
    last = big_stream.complete_insertions[-1].t_position
    quotients = rcf_quotients(big_stream, last)
    hits = good_hits(DigitStream(RCF, 0, quotients, False), schedule.alpha, len(quotients)).hits
    for r in report.rows:
        if r.k >= report.first_pass_k and r.n >= 1:
            assert r.n in hits


def test_negative_control_small_lambda(seed23):
    s = InsertionSchedule.make((2, 3), seed23.words, 2, seed23.gamma, lam=Fraction(1, 100),
                               alpha=ALPHA, certify=False)
    report = verify_good(build_stream(periodic_seed([0, 1]), s, 10**6))
    failing = [r.k for r in report.rows if not r.passed]
    assert failing and min(failing) == 5
    assert all(not r.passed for r in report.rows if r.k >= 5)


def test_verify_budget(big_stream):
    with pytest.raises(BudgetExceededError):
        verify_good(big_stream, budget=100)


def test_elision_and_alphabet(big_stream):
    assert set(big_stream.digits) <= {2, 3}
    kept = elide(big_stream)
    assert kept == big_stream.seed_digits[:len(kept)]
    assert len(big_stream.digits) == 10**6


def test_not2_positions(big_stream, schedule):
    assert not2_positions(big_stream, 0) == (2,)
    for k in range(1, 7):
        pos = not2_positions(big_stream, k)
        assert pos[0] == schedule.n(k)
        assert big_stream.digits[schedule.n(k) - 1] == schedule.t


@given(st.sampled_from([(2, 3), (2, 3, 4), (2, 4, 5)]), st.integers(0, 2**32),
       st.sampled_from([Fraction(1, 10), Fraction(1, 5), Fraction(1, 20)]))
@settings(max_examples=12)
def test_construction_invariants(alphabet, rng_seed, lam):
    seed = search_seed_words(alphabet, 2)
    s = InsertionSchedule.from_seed(seed, alphabet, lam=lam)
    c = build_stream(random_seed(len(seed.words), rng_seed), s, 3000)
    assert set(c.digits) <= set(alphabet)
    kept = elide(c)
    assert kept == c.seed_digits[:len(kept)]
    for ins in c.complete_insertions:
        assert ins.t_position == s.n(ins.k + 1)
        block = c.digits[ins.start - 1:ins.t_position - 1]
        assert block == (2,) * ins.block_len
        assert c.digits[ins.t_position - 1] == s.t
        not2_positions(c, ins.k)
    report = verify_good(c)
    assert all(r.product_bound_holds and r.growth_bound_holds for r in report.rows)


def test_invalid_schedules(seed23):
    g = seed23.gamma
    words = seed23.words
    with pytest.raises(ScheduleError):
        InsertionSchedule.make((3, 4), [(3, 3)], 2, g, lam=Fraction(1, 10))
    with pytest.raises(ScheduleError):
        InsertionSchedule.make((2, 3), [(3, 2)], 2, g, lam=Fraction(1, 10))
    with pytest.raises(ScheduleError):
        InsertionSchedule.make((2, 3), words, 2, g, lam=Fraction(1, 10), t=2)
    with pytest.raises(ScheduleError):
        InsertionSchedule.make((2, 3), words, 2, g, lam=Fraction(1, 10), alpha=Fraction(21, 10))
    with pytest.raises(ScheduleError):
        InsertionSchedule.make((2, 3), words, 2, g, lam=Fraction(1, 10), m=(1, 1, 1, 1, 1))
    with pytest.raises(ScheduleError):
        InsertionSchedule.make((2, 3), words, 2, g, epsilon=Fraction(1, 10), lam=Fraction(1, 10))
    with pytest.raises(ScheduleError):
        InsertionSchedule.make((2, 3), words, 2, g, lam=0, epsilon=1)
    with pytest.raises(ScheduleError):
        InsertionSchedule.make((2, 3), words, 2, g * 2, lam=Fraction(1, 10))


def test_seed_patterns():
    assert list(islice(parse_seed_pattern("0,1", 2), 5)) == [0, 1, 0, 1, 0]
    a = list(islice(parse_seed_pattern("random:7", 3), 50))
    assert a == list(islice(random_seed(3, 7), 50)) and set(a) <= {0, 1, 2}
    with pytest.raises(ValueError):
        parse_seed_pattern("0,2", 2)


def test_holder_report(schedule):
    report = holder_check(schedule, [periodic_seed([0, 1]), random_seed(2, 5)], range(0, 7))
    ks = {r.k for r in report.rows}
    assert ks == set(range(7))
    expected_rows = 2 * sum(len([n for n in schedule.B(k) if n >= 1]) for k in range(7))
    assert len(report.rows) == expected_rows
    bar = report.empirical_k_bar
    assert bar is not None and bar <= 6
    assert all(r.passed for r in report.rows if r.k >= bar)
    assert report.monotone_from is not None and report.monotone_from <= bar


def test_holder_without_insertions_is_trivial(schedule):
    # prefixes of B_0 contain no insertion, so the margin is -eps log|I| > 0
    report = holder_check(schedule, [periodic_seed([1])], [0])
    for r in report.rows:
        assert r.log_diameter == r.log_elided_diameter
        assert r.margin.lower > 0


def test_holder_budget(schedule):
    with pytest.raises(BudgetExceededError):
        holder_check(schedule, [periodic_seed([0])], [7], budget=1000)
