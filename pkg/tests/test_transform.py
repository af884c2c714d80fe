import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bcflab.cf import BCF, RCF, DigitStream, bcf_convergents, bcf_digits, rcf_convergents, rcf_digits
from bcflab.errors import AllTwosWindowError, InsufficientDigitsError, MalformedTailError
from bcflab.transform import bcf_to_rcf, iter_rcf_to_bcf, rcf_to_bcf, two_runs


def rcf(*digits, a0=0, terminated=False):
    return DigitStream(RCF, a0, tuple(digits), terminated)


def bcf(*digits, b0=1, terminated=False):
    return DigitStream(BCF, b0, tuple(digits), terminated)


def test_rcf_to_bcf_examples():
    assert rcf_to_bcf(rcf(1, 1, 1, 1)) == bcf(3, 3)
    assert rcf_to_bcf(rcf(2, 2, 2, 2)) == bcf(2, 4, 2, 4)
    assert rcf_to_bcf(rcf(4, 1)) == bcf(2, 2, 2, 3)


def test_bcf_to_rcf_examples():
    assert bcf_to_rcf(bcf(2, 2, 2, 3)).digits[:2] == (4, 1)
    assert bcf_to_rcf(bcf(3, 3, 3, 3)) == rcf(1, 1, 1, 1, 1, 1, 1, 1)
    assert bcf_to_rcf(bcf(2, 4, 2, 4)) == rcf(2, 2, 2, 2)


def test_count_limits():
    assert rcf_to_bcf(rcf(2, 2, 2, 2), 3) == bcf(2, 4, 2)
    with pytest.raises(InsufficientDigitsError):
        rcf_to_bcf(rcf(2, 2), 5)
    with pytest.raises(AllTwosWindowError):
        bcf_to_rcf(bcf(3, 2, 2), 3)
    with pytest.raises(AllTwosWindowError):
        bcf_to_rcf(bcf(), 1)


def test_malformed_tail():
    with pytest.raises(MalformedTailError):
        rcf_to_bcf(rcf(2, 1, terminated=True))


@given(st.lists(st.integers(1, 30), min_size=2, max_size=60))
def test_block_law(quotients):
    if len(quotients) % 2:
        quotients = quotients[:-1]
    digits = list(iter_rcf_to_bcf(quotients))
    runs = two_runs(digits)
    # each odd-index quotient a gives a run of a-1 twos (zero-length runs vanish)
    assert runs == [a - 1 for a in quotients[0::2] if a > 1]
    assert [d - 2 for d in digits if d >= 3] == quotients[1::2]


def _random_rational(rng):
    return Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 10**6))


def test_round_trip_on_random_rationals():
    rng = random.Random(1234)
    for _ in range(1000):
        x = _random_rational(rng)
        r = rcf_digits(x, 10**4)
        if r.digits and r.digits[-1] == 1:
            continue
        b = rcf_to_bcf(r)
        assert b == bcf_digits(x, 10**4)
        back = bcf_to_rcf(b)
        assert back.to_text() == r.to_text()


@given(st.fractions(min_value=-30, max_value=30, max_denominator=10**4))
def test_value_preserved(x):
    r = rcf_digits(x, 10**5)
    b = bcf_digits(x, 10**5)
    assert bcf_to_rcf(b) == r
    assert rcf_convergents(r).convergent(len(r.digits)) == x
    assert bcf_convergents(b).convergent(len(b.digits)) == x


@given(st.lists(st.integers(1, 20), min_size=2, max_size=40))
def test_round_trip_infinite_windows(quotients):
    if len(quotients) % 2:
        quotients = quotients[:-1]
    s = rcf(*quotients)
    assert bcf_to_rcf(rcf_to_bcf(s)) == s
