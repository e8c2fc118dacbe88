from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings as hypothesis_settings, strategies as st

from app.core.errors import DomainError, SizeLimitError
from app.services.exactmath import Verdict, pi_interval
from app.services.measures import build_mu
from app.services.rectopt import (
    b_witness,
    bound4_table,
    brute_sup,
    check_bound4,
    check_fixed_b_sandwich,
    optimal_A,
    oracle_sup,
    sign_pattern_sum,
    sup_closed,
    sup_fixed_b,
    sup_fixed_b_central,
    witness_majority,
)

PI50 = pi_interval(50)
KNOWN_SUPREMA = [Fraction(1, 2), Fraction(1, 4), Fraction(1, 4), Fraction(3, 16)]


def test_closed_form_examples() -> None:
    assert [sup_closed(n) for n in range(1, 5)] == KNOWN_SUPREMA


def test_closed_form_rejects_zero() -> None:
    with pytest.raises(DomainError):
        sup_closed(0)


@pytest.mark.parametrize("n", range(1, 5))
def test_brute_force_matches_closed_form(n: int) -> None:
    assert brute_sup(n) == sup_closed(n)


def test_brute_force_is_capped() -> None:
    with pytest.raises(SizeLimitError):
        brute_sup(5)


@pytest.mark.parametrize("n", range(1, 13))
def test_oracle_matches_closed_form(n: int) -> None:
    witness = oracle_sup(n)
    assert witness.value == sup_closed(n)


def test_oracle_prefers_the_full_column_set() -> None:
    witness = oracle_sup(5)
    assert witness.rect.cols == frozenset(range(5))


def test_oracle_is_independent_of_worker_count() -> None:
    assert oracle_sup(12, jobs=1) == oracle_sup(12, jobs=2)


def test_optimal_a_example() -> None:
    witness = optimal_A(build_mu(3), range(3))
    assert witness.rect.rows == frozenset({3, 5, 6, 7})
    assert witness.value == Fraction(1, 4)


def test_optimal_a_needs_columns() -> None:
    with pytest.raises(DomainError):
        optimal_A(build_mu(3), [])


@pytest.mark.parametrize("n", range(1, 9))
def test_majority_witness_attains_supremum(n: int) -> None:
    witness = witness_majority(n)
    assert witness.value == sup_closed(n)
    assert witness.rect.cols == frozenset(range(n))


def test_majority_witness_drops_zero_sum_rows() -> None:
    # n = 4: rows with 3 or 4 plus entries.
    assert len(witness_majority(4).rect.rows) == 5


@pytest.mark.parametrize("n", range(1, 7))
def test_every_column_set_reaches_fixed_b_value(n: int) -> None:
    mu = build_mu(n)
    for k in range(1, n + 1):
        for cols in combinations(range(n), k):
            assert optimal_A(mu, cols).value == sup_fixed_b(n, k)
            assert b_witness(mu, cols).value == sup_fixed_b(n, k)
            assert check_fixed_b_sandwich(n, k, sup_fixed_b(n, k), PI50) is Verdict.PROVEN_STRICT


def test_fixed_b_forms_agree() -> None:
    for n in range(1, 12):
        for k in range(1, n + 1):
            assert sup_fixed_b(n, k) == sup_fixed_b_central(n, k)
    assert sup_fixed_b(3, 3) == sup_closed(3)
    with pytest.raises(DomainError):
        sup_fixed_b(3, 4)


def test_bound4_is_strict_over_a_range() -> None:
    verdicts = list(bound4_table(500, PI50))
    assert [v.n for v in verdicts] == list(range(1, 501))
    assert all(v.lower_ok is Verdict.PROVEN_STRICT and v.upper_ok is Verdict.PROVEN_STRICT for v in verdicts)


def test_bound4_refutes_a_wrong_value() -> None:
    assert check_bound4(1, PI50, Fraction(2)).upper_ok is Verdict.PROVEN_FALSE
    assert check_bound4(1, PI50).verdict is Verdict.PROVEN_STRICT


@hypothesis_settings(max_examples=40)
@given(st.integers(min_value=1, max_value=6), st.data())
def test_sign_pattern_sum_within_four_suprema(n: int, data: st.DataObject) -> None:
    mu = build_mu(n)
    signs = st.sampled_from([-1, 1])
    rows = data.draw(st.lists(signs, min_size=2**n, max_size=2**n))
    cols = data.draw(st.lists(signs, min_size=n, max_size=n))
    value, bound = sign_pattern_sum(mu, rows, cols)
    assert abs(value) <= bound
