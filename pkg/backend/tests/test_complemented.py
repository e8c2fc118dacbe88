from fractions import Fraction

import numpy as np
import pytest

from app.core.errors import DomainError
from app.services.complemented import (
    C0Vector,
    TabulatedProductFunction,
    build_bumps,
    certify_disjointness,
    check_projection,
    complemented_definition,
    hat_gap,
    negative_support,
    op_S,
    op_T,
    orthogonality_matrix,
    pair,
    positive_support,
    random_c0_vector,
    random_tabulated,
    sign_bumps,
    support_points,
)
from app.services.measures import build_mu, measure_of_atoms
from app.services.spaces import model_point


@pytest.fixture(scope="module")
def family():
    return build_bumps(6)


def test_positive_support_carries_half_the_mass() -> None:
    for n in range(1, 7):
        mu = build_mu(n)
        positive = positive_support(n)
        assert len(positive) == n * 2 ** (n - 1)
        assert measure_of_atoms(mu, positive) == Fraction(1, 2)
        assert measure_of_atoms(mu, negative_support(n)) == Fraction(-1, 2)


def test_orthogonality_matrix_is_half_identity() -> None:
    big = build_bumps(12)
    matrix = orthogonality_matrix(big)
    for i, row in enumerate(matrix):
        for k, value in enumerate(row):
            assert value == (Fraction(1, 2) if i == k else 0)


def test_normalizing_constants(family) -> None:
    assert all(family.t(n) == 2 for n in range(1, 7))


def test_op_t_at_atoms(family) -> None:
    # Row 3 of the n = 2 sign matrix is (+1, +1); row 0 is (-1, -1).
    positive_atom = (model_point("K", 2, 3), model_point("L", 2, 0))
    negative_atom = (model_point("K", 2, 0), model_point("L", 2, 0))
    origin = (Fraction(0), Fraction(0))

    values = op_T(family, C0Vector.basis(2), [positive_atom, negative_atom, origin])

    assert values == [Fraction(2), Fraction(0), Fraction(0)]


def test_bump_values_match_cells(family) -> None:
    bump = family.phi(3)
    xs, ys = support_points(3)
    cells = bump.cells(3)
    for s, x in enumerate(xs):
        for j, y in enumerate(ys):
            assert bump(x, y) == cells.get((s, j), Fraction(0))
    assert bump.cells(2) == {}


def test_bumps_vanish_off_their_hats(family) -> None:
    bump = family.phi(1)
    # mu_1 = (delta_(1/2, 1) - delta_(1, 1)) / 2; hats at 1/2 have radius 1/12.
    assert bump(Fraction(1, 2), Fraction(1)) == 1
    assert bump(Fraction(1, 2) - Fraction(1, 24), Fraction(1)) == Fraction(1, 2)
    assert bump(Fraction(1), Fraction(1)) == 0
    assert bump(Fraction(3, 4), Fraction(1)) == 0


def test_st_is_identity_and_p_is_idempotent(family) -> None:
    rng = np.random.default_rng(42)
    n_range = range(1, 7)
    for _ in range(10):
        x = random_c0_vector(rng, n_range)
        f = random_tabulated(rng, range(1, 5))
        report = check_projection(family, x, f, range(1, 5))
        assert report.idempotent
        assert op_S(family.synthesize(x), n_range, family) == x


def test_projection_report_counts_atoms(family) -> None:
    f = TabulatedProductFunction(table={(Fraction(1, 2), Fraction(1)): Fraction(3)})
    report = check_projection(family, C0Vector.basis(1), f, [1, 2])
    assert report.st_identity and report.idempotent
    assert report.atoms_checked == 2 + 8


def test_op_s_of_a_tabulated_function() -> None:
    f = TabulatedProductFunction(table={(Fraction(1, 2), Fraction(1)): Fraction(3)})
    # Atom (1, 0) of mu_1 sits at (1/2, 1) with weight +1/2.
    assert op_S(f, [1, 2]) == C0Vector.of({1: Fraction(3, 2)})
    assert pair(build_mu(1), f) == Fraction(3, 2)


def test_c0_vector_arithmetic() -> None:
    x = C0Vector.of({1: 1, 2: 0, 5: Fraction(1, 3)})
    assert x.support == [1, 5]
    assert x[5] == Fraction(1, 3) and x[2] == 0
    assert (x - x) == C0Vector()
    assert (x + C0Vector.basis(2)).support == [1, 2, 5]
    assert (3 * x)[1] == 3
    assert x.restrict([5]).to_json() == {"5": "1/3"}
    with pytest.raises(DomainError):
        C0Vector.of({0: 1})


def test_disjointness_in_closed_form(family) -> None:
    report = certify_disjointness(family)
    assert report.disjoint
    assert report.min_gap_k > 0 and report.min_gap_l > 0
    assert hat_gap(1) == Fraction(1, 6)


def test_bump_family_is_a_complemented_definition_witness(family) -> None:
    report = complemented_definition(family)
    assert report.satisfied
    assert report.diagonal_inf == Fraction(1, 2)


def test_sign_bumps_pair_to_one_but_are_not_non_negative() -> None:
    bumps = sign_bumps(4)
    for k, bump in enumerate(bumps, start=1):
        for n in range(1, 5):
            assert pair(build_mu(n), bump) == (1 if n == k else 0)
    report = complemented_definition(build_bumps(4), signed=True)
    assert report.orthogonal
    assert not report.non_negative
    assert not report.satisfied


def test_family_rejects_indices_out_of_range(family) -> None:
    with pytest.raises(DomainError):
        family.measure(7)
