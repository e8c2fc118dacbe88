from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings, strategies as st

from app.core.config import settings
from app.core.errors import DomainError, InvariantViolation, SizeLimitError
from app.services.exactmath import binom
from app.services.measures import (
    IndexRectangle,
    SampledFunction,
    SignMatrix,
    build_mu,
    build_sign_matrix,
    check_size,
    eval_function,
    eval_grid,
    eval_rectangle,
    eval_tensor,
    level_sets,
    measure_from_matrix,
    measure_of_atoms,
    negated_rows,
    rectangle_to_json,
    tensor_sum,
)


def test_sign_matrix_rows_follow_bits() -> None:
    matrix = build_sign_matrix(2)

    assert matrix.row(0) == (-1, -1)
    assert matrix.row(1) == (1, -1)
    assert matrix.row(2) == (-1, 1)
    assert matrix.row(3) == (1, 1)
    assert matrix.is_canonical()


@pytest.mark.parametrize("n", range(1, 9))
def test_sign_matrix_invariants(n: int) -> None:
    matrix = build_sign_matrix(n)
    assert matrix.entries.shape == (2**n, n)
    assert matrix.invariant_problems() == []
    assert not matrix.entries.flags.writeable


@pytest.mark.parametrize("n", range(1, 21))
def test_mu_has_norm_one_and_zero_mass(n: int) -> None:
    mu = build_mu(n)

    assert mu.total_variation() == 1
    assert mu.total_mass() == 0
    assert mu.support_size == n * 2**n
    assert mu.scale == Fraction(1, n * 2**n)


def test_size_cap_is_enforced() -> None:
    with pytest.raises(SizeLimitError) as excinfo:
        check_size(settings.N_MAX + 1)
    assert excinfo.value.limit == settings.N_MAX
    with pytest.raises(DomainError):
        check_size(0)


def test_from_rows_rejects_duplicate_rows() -> None:
    with pytest.raises(DomainError):
        SignMatrix.from_rows(2, [[-1, -1], [-1, -1], [1, 1], [1, 1]])


def test_from_rows_accepts_a_permuted_bijection() -> None:
    matrix = SignMatrix.from_rows(2, [[1, 1], [-1, 1], [1, -1], [-1, -1]])
    assert not matrix.is_canonical()
    assert matrix.negated_row(0) == 3
    assert measure_from_matrix(matrix).total_variation() == 1


def test_corrupted_matrix_violates_mass() -> None:
    entries = build_sign_matrix(3).entries.copy()
    entries[0, 0] = 1
    with pytest.raises(InvariantViolation) as excinfo:
        measure_from_matrix(SignMatrix.unchecked(3, entries))
    assert excinfo.value.claim == "mass"


def test_eval_rectangle_examples() -> None:
    mu = build_mu(3)
    all_cols = range(3)

    assert eval_rectangle(mu, IndexRectangle.of([3, 5, 6, 7], all_cols)) == Fraction(1, 4)
    assert eval_rectangle(mu, IndexRectangle.of(range(8), all_cols)) == 0
    assert eval_rectangle(mu, IndexRectangle.of([], all_cols)) == 0
    with pytest.raises(DomainError):
        eval_rectangle(mu, IndexRectangle.of([8], [0]))


@hypothesis_settings(max_examples=50)
@given(st.integers(min_value=1, max_value=6), st.data())
def test_rectangle_measure_is_additive_in_rows(n: int, data: st.DataObject) -> None:
    mu = build_mu(n)
    rows = data.draw(st.sets(st.integers(0, 2**n - 1)))
    cols = data.draw(st.sets(st.integers(0, n - 1)))
    split = data.draw(st.sets(st.sampled_from(sorted(rows)))) if rows else set()
    whole = eval_rectangle(mu, IndexRectangle.of(rows, cols))
    left = eval_rectangle(mu, IndexRectangle.of(split, cols))
    right = eval_rectangle(mu, IndexRectangle.of(rows - split, cols))
    assert whole == left + right


@hypothesis_settings(max_examples=50)
@given(st.integers(min_value=1, max_value=6), st.data())
def test_rectangle_measure_is_additive_in_columns(n: int, data: st.DataObject) -> None:
    mu = build_mu(n)
    rows = data.draw(st.sets(st.integers(0, 2**n - 1)))
    cols = data.draw(st.sets(st.integers(0, n - 1)))
    split = data.draw(st.sets(st.sampled_from(sorted(cols)))) if cols else set()
    whole = eval_rectangle(mu, IndexRectangle.of(rows, cols))
    left = eval_rectangle(mu, IndexRectangle.of(rows, split))
    right = eval_rectangle(mu, IndexRectangle.of(rows, cols - split))
    assert whole == left + right


@hypothesis_settings(max_examples=50)
@given(st.integers(min_value=1, max_value=6), st.data())
def test_negated_rows_flip_the_sign(n: int, data: st.DataObject) -> None:
    mu = build_mu(n)
    rows = data.draw(st.sets(st.integers(0, 2**n - 1)))
    cols = data.draw(st.sets(st.integers(0, n - 1)))
    flipped = negated_rows(mu, rows)
    assert eval_rectangle(mu, IndexRectangle.of(flipped, cols)) == -eval_rectangle(mu, IndexRectangle.of(rows, cols))


def test_level_sets_count_binomially_on_all_rows() -> None:
    n, cols = 5, [0, 2, 3]
    mu = build_mu(n)
    levels = level_sets(mu, range(2**n), cols)
    for i, members in levels.items():
        assert len(members) == binom(len(cols), i) * 2 ** (n - len(cols))


def test_measure_of_atoms_on_positive_part() -> None:
    mu = build_mu(4)
    rows, cols = np.nonzero(mu.matrix.entries > 0)
    assert measure_of_atoms(mu, zip(rows.tolist(), cols.tolist())) == Fraction(1, 2)
    with pytest.raises(DomainError):
        measure_of_atoms(mu, [(16, 0)])


def test_function_evaluations_agree() -> None:
    n = 3
    mu = build_mu(n)
    f = SampledFunction.axis(n, "K", [Fraction(s, 7) for s in range(2**n)])
    g = SampledFunction.axis(n, "L", [Fraction(1, 2), Fraction(-1, 3), Fraction(2)])
    grid = SampledFunction.tensor(f, g)
    values = np.empty((2**n, n), dtype=object)
    for (s, j), value in grid.values.items():
        values[s, j] = value

    expected = eval_tensor(mu, f.vector(), g.vector())
    assert eval_function(mu, grid) == expected
    assert eval_grid(mu, values) == expected


def test_tensor_sum_is_exact_for_small_and_huge_integers() -> None:
    mu = build_mu(3)
    g = np.array([1, -2, 3])
    inner = [sum(int(g[j]) * mu.matrix.entry(s, j) for j in range(3)) for s in range(8)]
    small = np.arange(8)
    huge = np.array([2**70 + s for s in range(8)], dtype=object)

    assert tensor_sum(mu, small, g) == sum(s * inner[s] for s in range(8))
    assert tensor_sum(mu, huge, g) == sum((2**70 + s) * inner[s] for s in range(8))
    with pytest.raises(DomainError):
        tensor_sum(mu, small[:4], g)


def test_sampled_function_reports_missing_points() -> None:
    f = SampledFunction(n=2, domain="K", values={0: Fraction(1)})
    with pytest.raises(DomainError):
        f.vector()
    with pytest.raises(DomainError):
        SampledFunction.tensor(f, f)


def test_direct_sum_of_constants_integrates_to_zero() -> None:
    n = 4
    mu = build_mu(n)
    f = SampledFunction.axis(n, "K", [Fraction(3)] * 2**n)
    g = SampledFunction.axis(n, "L", [Fraction(-5)] * n)
    assert eval_function(mu, SampledFunction.direct_sum(f, g)) == 0


def test_rectangle_json_uses_exact_strings() -> None:
    mu = build_mu(3)
    payload = rectangle_to_json(mu, IndexRectangle.of([7, 3], [0, 1, 2]))

    assert payload["n"] == 3
    assert payload["scale"] == "1/24"
    assert payload["rectangle"] == {"rows": [3, 7], "cols": [0, 1, 2]}
    assert payload["value"] == "1/6"
