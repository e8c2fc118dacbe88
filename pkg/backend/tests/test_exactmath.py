from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from app.core.errors import DomainError, PrecisionUnavailableError
from app.services.exactmath import (
    PiInterval,
    Verdict,
    binom,
    ceil_central_binomials,
    central_binom_bound_check,
    central_binomials,
    closed_values,
    combine,
    decimal_text,
    fraction_text,
    parse_fraction,
    pascal_rows,
    pi_interval,
    pi_times_greater_than,
    pi_times_less_than,
    s_identity,
    sqrt_lower,
    sqrt_upper,
    upper_half_binomial_closed,
    upper_half_binomial_sum,
    wallis,
    wallis_closed,
    wallis_lower_product,
    wallis_range,
    wallis_sequence,
)

PI50 = pi_interval(50)


def test_binom_small_values_and_out_of_range() -> None:
    assert binom(5, 2) == 10
    assert binom(0, 0) == 1
    assert binom(10, 10) == 1
    assert binom(3, 5) == 0
    assert binom(-1, 0) == 0
    assert binom(4, -1) == 0


def test_binom_matches_pascal_rows() -> None:
    for k, row in pascal_rows(40):
        assert row == [binom(k, i) for i in range(k + 1)]


def test_s_identity_agrees_with_closed_form() -> None:
    assert s_identity(4) == (12, 12)
    for k in range(1, 121):
        identity = s_identity(k)
        assert identity.sum_value == identity.closed_value


def test_s_identity_rejects_non_positive_k() -> None:
    with pytest.raises(DomainError):
        s_identity(0)


def test_g_is_nondecreasing() -> None:
    values = [closed for _, closed in closed_values(300)]
    assert all(2 * a <= b for a, b in zip(values, values[1:]))


def test_streaming_recurrences_match_binom() -> None:
    for k, value in ceil_central_binomials(80):
        assert value == binom(k, (k + 1) // 2)
    for m, value in central_binomials(60):
        assert value == binom(2 * m, m)


def test_half_sum_identity() -> None:
    assert upper_half_binomial_sum(2) == 3
    for k in range(1, 60):
        assert upper_half_binomial_sum(k) == upper_half_binomial_closed(k)


def test_wallis_examples() -> None:
    assert wallis(1) == (Fraction(3, 4), Fraction(1, 2))
    assert wallis(2) == (Fraction(45, 64), Fraction(9, 16))


def test_wallis_forms_agree() -> None:
    for m, pair in wallis_sequence(30):
        assert wallis(m) == pair
        assert wallis_closed(m) == pair.upper_seq
        assert wallis_lower_product(m) == pair.lower_seq


def test_wallis_sequences_are_monotone() -> None:
    pairs = [pair for _, pair in wallis_sequence(40)]
    for before, after in zip(pairs, pairs[1:]):
        assert after.upper_seq < before.upper_seq
        assert after.lower_seq > before.lower_seq


def test_wallis_range_certifies_bracketing() -> None:
    summary = wallis_range(300, PI50)

    assert summary.monotone
    assert summary.bracketed
    assert summary.upper_gap_ok and summary.lower_gap_ok
    assert summary.first_failure is None
    assert summary.verdict is Verdict.PROVEN_STRICT


def test_wallis_range_tolerance_can_fail() -> None:
    summary = wallis_range(10, PI50, tolerance=Fraction(1, 10**6))
    assert summary.bracketed
    assert summary.verdict is Verdict.PROVEN_FALSE


def test_pi_interval_two_digits() -> None:
    pi = pi_interval(2)
    assert pi.lo == Fraction(314, 100)
    assert pi.hi == Fraction(315, 100)
    assert pi.width == Fraction(1, 100)


@pytest.mark.parametrize("digits", [0, 121])
def test_pi_interval_rejects_unavailable_precision(digits: int) -> None:
    with pytest.raises(PrecisionUnavailableError) as excinfo:
        pi_interval(digits)
    assert excinfo.value.requested == digits


def test_pi_interval_must_enclose_pi() -> None:
    with pytest.raises(DomainError):
        PiInterval(lo=Fraction(3), hi=Fraction(31, 10), digits=1)


def test_pi_comparisons_are_three_valued() -> None:
    coarse = pi_interval(2)
    fine = pi_interval(10)
    target = Fraction(31416, 10000)

    assert pi_times_less_than(Fraction(1), target, coarse) is Verdict.INCONCLUSIVE
    assert pi_times_less_than(Fraction(1), target, fine) is Verdict.PROVEN_STRICT
    assert pi_times_less_than(Fraction(1), Fraction(3), coarse) is Verdict.PROVEN_FALSE
    assert pi_times_greater_than(Fraction(1), Fraction(3), coarse) is Verdict.PROVEN_STRICT
    assert pi_times_greater_than(Fraction(1), Fraction(4), coarse) is Verdict.PROVEN_FALSE


def test_central_binomial_bounds_are_strict() -> None:
    for m, c in central_binomials(400):
        assert central_binom_bound_check(m, PI50, central=c) is Verdict.PROVEN_STRICT
    assert central_binom_bound_check(1, PI50) is Verdict.PROVEN_STRICT


def test_combine_orders_verdicts() -> None:
    assert combine(Verdict.PROVEN_STRICT, Verdict.PROVEN_STRICT) is Verdict.PROVEN_STRICT
    assert combine(Verdict.PROVEN_STRICT, Verdict.PROVEN_HOLDS) is Verdict.PROVEN_HOLDS
    assert combine(Verdict.PROVEN_HOLDS, Verdict.INCONCLUSIVE) is Verdict.INCONCLUSIVE
    assert combine(Verdict.INCONCLUSIVE, Verdict.PROVEN_FALSE) is Verdict.PROVEN_FALSE
    assert Verdict.PROVEN_HOLDS.is_proven and not Verdict.INCONCLUSIVE.is_proven


@given(
    st.fractions(min_value=0, max_value=10**6, max_denominator=10**6),
    st.sampled_from([10, 10**3, 10**9]),
)
def test_sqrt_brackets(x: Fraction, scale: int) -> None:
    low, high = sqrt_lower(x, scale), sqrt_upper(x, scale)
    assert low * low <= x <= high * high
    assert high - low <= Fraction(2, scale)


def test_fraction_rendering() -> None:
    assert fraction_text(Fraction(3, 16)) == "3/16"
    assert fraction_text(Fraction(2)) == "2/1"
    assert parse_fraction(" 3/16 ") == Fraction(3, 16)
    with pytest.raises(DomainError):
        parse_fraction("three")
    assert decimal_text(Fraction(3, 16)) == "0.1875"
    assert decimal_text(Fraction(1, 3)) == "0.333333333333"
