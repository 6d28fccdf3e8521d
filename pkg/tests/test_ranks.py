import math

import numpy as np
import pytest

from globenv import Alternative, ArgGrid, CurveSet
from globenv.errors import TooFewCurvesError
from globenv.ranks import (
    continuous_rank_matrix,
    continuous_ranks,
    pointwise_ranks,
    rank_matrix,
    side_ranks,
)

from oracles import continuous_column, midranks


def col(*values):
    return np.asarray(values, dtype=float)[:, None]


def test_rank_matrix_ties_average():
    got = rank_matrix(col(3.0, 1.0, 3.0, 7.0))
    assert np.array_equal(got[:, 0], [2.5, 1.0, 2.5, 4.0])


def test_rank_matrix_column_sums():
    rng = np.random.default_rng(11)
    for _ in range(20):
        s, d = rng.integers(2, 12), rng.integers(1, 6)
        values = rng.integers(0, 5, size=(s, d)).astype(float)
        sums = rank_matrix(values).sum(axis=0)
        assert np.allclose(sums, s * (s + 1) / 2)


def test_rank_matrix_matches_counting_oracle():
    rng = np.random.default_rng(12)
    for _ in range(50):
        s, d = rng.integers(2, 9), rng.integers(1, 5)
        values = rng.integers(0, 6, size=(s, d)).astype(float)
        got = rank_matrix(values)
        for k in range(d):
            expected = midranks(list(values[:, k]))
            assert np.allclose(got[:, k], expected)


def test_continuous_ranks_single_column_example():
    # column (1, 2, 4): boundary ranks use exponential falloff, the interior
    # rank interpolates between its neighbours
    got, degenerate = continuous_rank_matrix(col(1.0, 2.0, 4.0))
    expected = [math.exp(-0.5), 1.0 + 1.0 / 3.0, 3.0 - math.exp(-2.0)]
    assert np.allclose(got[:, 0], expected, rtol=0, atol=1e-15)
    assert not degenerate[0]


def test_continuous_ranks_tie_block_shares_average_position():
    got, _ = continuous_rank_matrix(col(5.0, 5.0, 7.0, 9.0))
    assert got[0, 0] == got[1, 0] == 1.0
    assert got[2, 0] == pytest.approx(2.0 + 2.0 / 4.0)
    assert got[3, 0] == pytest.approx(4.0 - math.exp(-1.0))


def test_continuous_ranks_degenerate_boundary_flagged():
    # lone minimum with everything above it tied: the boundary denominator
    # vanishes and the tie-rule value 0.5 steps in
    got, degenerate = continuous_rank_matrix(col(1.0, 2.0, 2.0))
    assert degenerate[0]
    assert got[0, 0] == 0.5
    assert got[1, 0] == got[2, 0] == 2.0


def test_continuous_ranks_match_oracle():
    rng = np.random.default_rng(13)
    for trial in range(60):
        s, d = int(rng.integers(3, 10)), int(rng.integers(1, 4))
        if trial % 2:
            values = rng.integers(0, 5, size=(s, d)).astype(float)
        else:
            values = rng.normal(size=(s, d))
        got, flags = continuous_rank_matrix(values)
        for k in range(d):
            expected, deg = continuous_column(list(values[:, k]))
            assert np.allclose(got[:, k], expected, rtol=0, atol=1e-12)
            assert bool(flags[k]) == deg


def test_continuous_ranks_order_follows_values():
    rng = np.random.default_rng(14)
    values = rng.normal(size=(20, 1))
    got, _ = continuous_rank_matrix(values)
    assert np.array_equal(np.argsort(got[:, 0]), np.argsort(values[:, 0]))


def test_side_ranks_folding():
    raw = rank_matrix(col(1.0, 2.0, 3.0, 4.0))
    assert np.array_equal(side_ranks(raw, Alternative.LESS)[:, 0], [1, 2, 3, 4])
    assert np.array_equal(side_ranks(raw, Alternative.GREATER)[:, 0], [4, 3, 2, 1])
    assert np.array_equal(side_ranks(raw, Alternative.TWO_SIDED)[:, 0], [1, 2, 2, 1])


def test_side_ranks_continuous_uses_s_minus_c():
    craw, _ = continuous_rank_matrix(col(1.0, 2.0, 4.0))
    greater = side_ranks(craw, Alternative.GREATER, continuous=True)
    assert np.allclose(greater[:, 0], 3.0 - craw[:, 0])


def test_less_on_negated_equals_greater():
    # negating all values mirrors both integer and continuous ranks exactly
    rng = np.random.default_rng(15)
    for _ in range(20):
        s, d = int(rng.integers(3, 9)), int(rng.integers(1, 4))
        values = np.round(rng.normal(size=(s, d)), 1)
        r_less = side_ranks(rank_matrix(-values), Alternative.LESS)
        r_greater = side_ranks(rank_matrix(values), Alternative.GREATER)
        assert np.allclose(r_less, r_greater)
        c_neg, _ = continuous_rank_matrix(-values)
        c_pos, _ = continuous_rank_matrix(values)
        assert np.allclose(c_neg, s - c_pos, rtol=0, atol=1e-12)


def test_pointwise_ranks_wrapper():
    cs = CurveSet(ArgGrid.default(2), np.array([[1.0, 4.0], [2.0, 3.0], [3.0, 2.0], [4.0, 1.0]]))
    pr = pointwise_ranks(cs, "two.sided")
    assert np.array_equal(pr.raw[:, 0], [1, 2, 3, 4])
    assert np.array_equal(pr.sided.min(axis=1), [1, 2, 2, 1])


def test_continuous_ranks_wrapper_needs_three_curves():
    cs = CurveSet(ArgGrid.default(2), np.zeros((2, 2)))
    with pytest.raises(TooFewCurvesError):
        continuous_ranks(cs)


def test_continuous_ranks_wrapper_flags():
    cs = CurveSet(ArgGrid.default(1), col(1.0, 2.0, 2.0))
    cr = continuous_ranks(cs, "less")
    assert cr.degenerate_columns[0]
    assert np.array_equal(cr.raw, cr.sided)
