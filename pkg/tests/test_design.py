from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import EX2_A, EX3_D, TREE_A
from loglinmle import (build_design, check_kernel_pair, has_overall_effect,
                       kernel_basis, l1_norm, normalize)
from loglinmle.design import exact_rank, read_matrix_csv, write_matrix_csv
from loglinmle.errors import (DimensionMismatch, EmptyInput, LogLinearError,
                              NegativeEntry, RankDeficient, ZeroColumn)


def _same_rowspan(a, b):
    a, b = np.asarray(a), np.asarray(b)
    ra, rb = exact_rank(a), exact_rank(b)
    return ra == rb == exact_rank(np.vstack([a, b]))


class TestBuildDesign:

    def test_fixture_designs(self):
        A = build_design(TREE_A)
        assert (A.num_rows, A.num_cells) == (2, 4)
        B = build_design(EX2_A)
        assert B.shape == (2, 4)

    @pytest.mark.parametrize("rows, exc", [
        ([[1, 1], [2, 2]], RankDeficient),
        ([[1, -1]], NegativeEntry),
        ([[1, 0], [1, 0]], ZeroColumn),
        ([], EmptyInput),
        ([[]], EmptyInput),
        ([[1, 2], [1]], DimensionMismatch),
    ])
    def test_rejects(self, rows, exc):
        with pytest.raises(exc):
            build_design(rows)

    def test_non_integer_rejected(self):
        with pytest.raises(ValueError):
            build_design([[1.5, 1]])

    def test_more_rows_than_columns_is_rank_deficient(self):
        with pytest.raises(RankDeficient):
            build_design([[1, 0], [0, 1], [1, 1]])

    def test_immutable(self):
        A = build_design(EX2_A)
        with pytest.raises(ValueError):
            A.entries[0, 0] = 7


class TestNorm:

    @pytest.mark.parametrize("rows, expected", [
        (EX2_A, 4),       # column sums 2, 3, 3, 4
        (TREE_A, 3),      # column sums 3, 3, 2, 1
        ([[1, 0], [0, 1]], 1),
    ])
    def test_l1_norm(self, rows, expected):
        assert l1_norm(build_design(rows)) == expected

    def test_normalize_ex2(self):
        N = normalize(build_design(EX2_A))
        np.testing.assert_array_equal(
            N.entries, [[.25, 0, .75, .5], [.25, .75, 0, .5]])
        np.testing.assert_array_equal(N.slack, [.5, .25, .25, 0])

    def test_normalize_unit_column_sums_is_identity(self):
        A = build_design([[1, 0, 1], [0, 1, 0]])
        N = normalize(A)
        np.testing.assert_array_equal(N.entries, A.entries)
        np.testing.assert_array_equal(N.slack, 0)

    def test_normalize_scalar(self):
        N = normalize(build_design([[2]]))
        np.testing.assert_array_equal(N.entries, [[1]])
        np.testing.assert_array_equal(N.slack, [0])


class TestOverallEffect:

    def test_fixtures_lack_it(self):
        assert not has_overall_effect(build_design(EX2_A))
        assert not has_overall_effect(build_design(TREE_A))

    def test_ones_row(self):
        assert has_overall_effect(build_design([[1, 1, 1, 1], [0, 1, 2, 3]]))

    def test_independence_model_has_it(self):
        assert has_overall_effect(build_design([[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 1, 0]]))


class TestKernelBasis:

    def test_ex2_matches_reference_basis_up_to_span(self):
        D = kernel_basis(build_design(EX2_A))
        assert D.entries.shape == (2, 4)
        assert _same_rowspan(D.entries, EX3_D)

    def test_tree_contains_reference_odds_vectors(self):
        A = build_design(TREE_A)
        D = kernel_basis(A)
        for v in ([1, -2, 1, 1], [0, 1, -2, 1]):
            assert not np.any(np.asarray(A.entries) @ v)
            assert exact_rank(np.vstack([D.entries, v])) == 2

    def test_square_is_empty(self):
        D = kernel_basis(build_design([[1, 2], [0, 1]]))
        assert D.entries.shape == (0, 2)

    def test_canonical_form(self):
        D = kernel_basis(build_design([[2, 4, 6, 1], [0, 3, 3, 3]]))
        for row in D.entries:
            assert np.gcd.reduce(np.abs(row)) == 1
            assert row[np.flatnonzero(row)[0]] > 0

    def test_deterministic(self):
        A = build_design(TREE_A)
        assert kernel_basis(A) == kernel_basis(A)


class TestKernelPair:

    def test_known_pair(self):
        assert check_kernel_pair(build_design(EX2_A), EX3_D)

    def test_perturbed(self):
        D = np.array(EX3_D)
        D[0, 0] += 1
        assert not check_kernel_pair(build_design(EX2_A), D)

    def test_rank_short(self):
        assert not check_kernel_pair(build_design(EX2_A), [[2, 0, 0, -1], [4, 0, 0, -2]])

    def test_own_basis(self):
        A = build_design(TREE_A)
        assert check_kernel_pair(A, kernel_basis(A))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            check_kernel_pair(build_design(EX2_A), [[1, -1, 0]])


class TestCsv:

    def test_round_trip(self, tmp_path):
        path = tmp_path / "A.csv"
        write_matrix_csv(path, build_design(EX2_A))
        assert read_matrix_csv(path) == EX2_A
        assert path.read_text() == "1,0,3,2\n1,3,0,2\n"


# ---------------------------------------------------------------------------
# properties

small_matrices = st.integers(1, 3).flatmap(
    lambda J: st.integers(J, 6).flatmap(
        lambda I: st.lists(st.lists(st.integers(0, 3), min_size=I, max_size=I),
                           min_size=J, max_size=J)))


def _valid(rows):
    try:
        return build_design(rows)
    except LogLinearError:
        assume(False)


@settings(max_examples=150, deadline=None)
@given(small_matrices)
def test_kernel_annihilates_exactly(rows):
    A = _valid(rows)
    D = kernel_basis(A)
    prod = D.entries.astype(object) @ A.entries.T.astype(object)
    assert all(x == 0 for x in prod.ravel())
    assert exact_rank(np.vstack([A.entries, D.entries])) == A.num_cells
    assert check_kernel_pair(A, D)


@settings(max_examples=100, deadline=None)
@given(small_matrices)
def test_kernel_annihilates_normalized(rows):
    A = _valid(rows)
    D = kernel_basis(A)
    assert np.all(np.abs(D.entries @ normalize(A).entries.T) <= 1e-12)


@settings(max_examples=100, deadline=None)
@given(small_matrices, st.integers(1, 5), st.data())
def test_overall_effect_invariances(rows, scale, data):
    A = _valid(rows)
    flag = has_overall_effect(A)
    a = np.asarray(A.entries)
    j = data.draw(st.integers(0, A.num_rows - 1))
    scaled = a.copy()
    scaled[j] *= scale
    assert has_overall_effect(build_design(scaled.tolist())) == flag
    coef = data.draw(st.lists(st.integers(0, 3), min_size=A.num_rows,
                              max_size=A.num_rows))
    stacked = np.vstack([a, np.asarray(coef) @ a])
    assert has_overall_effect(stacked) == flag


@settings(max_examples=100, deadline=None)
@given(small_matrices)
def test_unit_norm_normalize_is_exact(rows):
    A = _valid(rows)
    if l1_norm(A) == 1:
        np.testing.assert_array_equal(normalize(A).entries, A.entries)
    N = normalize(A)
    assert N.entries.sum(axis=0).max() == pytest.approx(1.0, abs=1e-15)
    assert np.all(N.slack >= 0) and np.all(N.slack < 1) and np.any(N.slack == 0)


def test_exact_rank_rational():
    assert exact_rank([[Fraction(1, 3), Fraction(2, 3)], [1, 2]]) == 1
