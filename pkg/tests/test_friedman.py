from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import friedmanchisquare

from courseforge.review.friedman import DegenerateInput, average_ranks, friedman


def brute_force_q(matrix: list[list[float]]) -> float:
    """Independent oracle: explicit per-block ranking via sorted positions.

    Ranks are assigned by enumerating each block's values in sorted order
    and averaging positions over exact ties, then folding the classic
    statistic directly from its definition.
    """
    k = len(matrix)
    n = len(matrix[0])
    rank_sums = [0.0] * k
    for block in range(n):
        values = [matrix[j][block] for j in range(k)]
        for j, value in enumerate(values):
            positions = [p + 1 for p, v in enumerate(sorted(values)) if v == value]
            rank_sums[j] += sum(positions) / len(positions)
    total = sum(r * r for r in rank_sums)
    return 12.0 * total / (n * k * (k + 1)) - 3.0 * n * (k + 1)


def test_oracle_and_implementation_agree_on_random_4x6_matrices():
    rng = random.Random(20260810)
    for _ in range(50):
        matrix = [[rng.uniform(1, 5) for _ in range(6)] for _ in range(4)]
        result = friedman(matrix)
        assert math.isclose(result.q, brute_force_q(matrix), abs_tol=1e-9)


def test_oracle_agreement_with_ties_present():
    rng = random.Random(42)
    for _ in range(50):
        matrix = [[rng.choice([1, 2, 3, 3, 4, 5]) for _ in range(6)] for _ in range(4)]
        result = friedman(matrix)
        assert math.isclose(result.q, brute_force_q(matrix), abs_tol=1e-9)


def test_identical_columns_give_zero():
    matrix = [[3.0, 4.0, 2.0]] * 3
    result = friedman(matrix)
    assert result.q == 0.0
    assert result.p == 1.0


def test_three_by_three_hand_matrix():
    # blocks rank cleanly: treatment 3 > 2 > 1 in every block
    matrix = [[1, 2, 3], [4, 5, 6], [7, 8, 9]]
    expected = brute_force_q([[float(x) for x in row] for row in matrix])
    result = friedman(matrix)
    assert math.isclose(result.q, expected, abs_tol=1e-12)
    assert math.isclose(result.q, 6.0, abs_tol=1e-12)  # rank sums 3, 6, 9


def test_tie_corrected_variant_matches_scipy():
    rng = random.Random(7)
    for _ in range(25):
        matrix = [[rng.choice([1, 2, 2, 3, 4, 5]) for _ in range(8)] for _ in range(3)]
        columns = [list(row) for row in matrix]
        try:
            expected = friedmanchisquare(*columns)
        except ValueError:
            continue  # scipy rejects all-tied data
        result = friedman(matrix, tie_correction=True)
        assert math.isclose(result.q, float(expected.statistic), abs_tol=1e-9)
        assert math.isclose(result.p, float(expected.pvalue), abs_tol=1e-9)


def test_uncorrected_variant_matches_scipy_when_no_ties():
    rng = random.Random(11)
    matrix = [[rng.random() for _ in range(9)] for _ in range(4)]
    expected = friedmanchisquare(*[list(r) for r in matrix])
    result = friedman(matrix)
    assert math.isclose(result.q, float(expected.statistic), abs_tol=1e-9)


@settings(max_examples=40)
@given(
    matrix=st.lists(
        st.lists(st.integers(min_value=0, max_value=100).map(lambda i: i / 10), min_size=4, max_size=4),
        min_size=3,
        max_size=3,
    ),
    scale=st.floats(min_value=0.1, max_value=4.0),
    shift=st.floats(min_value=-5.0, max_value=5.0),
)
def test_invariance_under_strictly_monotone_transforms(matrix, scale, shift):
    transformed = [[scale * cell**3 + shift for cell in row] for row in matrix]
    base = friedman(matrix)
    mapped = friedman(transformed)
    assert math.isclose(base.q, mapped.q, abs_tol=1e-9)


def test_degenerate_inputs_rejected():
    with pytest.raises(DegenerateInput):
        friedman([[1, 2, 3]])
    with pytest.raises(DegenerateInput):
        friedman([[1], [2]])
    with pytest.raises(DegenerateInput):
        friedman([[1, 2], [1, 2, 3]])
    with pytest.raises(DegenerateInput):
        friedman([[1, None], [2, 3]])  # type: ignore[list-item]


def test_average_ranks_handles_ties():
    assert average_ranks([10, 20, 20, 30]) == [1.0, 2.5, 2.5, 4.0]
    assert average_ranks([5, 5, 5]) == [2.0, 2.0, 2.0]


def test_p_value_uses_chi_squared_with_k_minus_1_dof():
    matrix = [[1, 2, 3], [4, 5, 6], [7, 8, 9]]
    result = friedman(matrix)
    assert math.isclose(result.p, math.exp(-result.q / 2), rel_tol=1e-12)  # df=2
