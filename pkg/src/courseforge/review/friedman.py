"""Friedman rank test over a k-treatments x n-blocks score matrix.

Ties within a block receive average ranks. The classic statistic is
reported by default; the tie-correction divisor is available behind a
flag. The p-value comes from the chi-squared approximation with k-1
degrees of freedom.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from scipy.stats import chi2

from courseforge.errors import CourseforgeError


class DegenerateInput(CourseforgeError):
    """Fewer than 2 treatments or 2 blocks, ragged rows, or missing cells."""


@dataclass(frozen=True)
class FriedmanResult:
    q: float
    p: float
    rank_sums: tuple[float, ...]
    k: int
    n: int


def average_ranks(values: Sequence[float]) -> list[float]:
    """Rank one block's values ascending, averaging ranks over ties."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        # positions i..j share the mean of ranks i+1..j+1
        mean_rank = (i + j + 2) / 2
        for pos in range(i, j + 1):
            ranks[order[pos]] = mean_rank
        i = j + 1
    return ranks


def friedman(
    matrix: Sequence[Sequence[float]],
    tie_correction: bool = False,
) -> FriedmanResult:
    """Compute the Friedman statistic for `matrix[treatment][block]` scores."""
    k = len(matrix)
    if k < 2:
        raise DegenerateInput(f"need at least 2 treatments, got {k}")
    n = len(matrix[0])
    if any(len(row) != n for row in matrix):
        raise DegenerateInput("all treatments must score the same blocks")
    if n < 2:
        raise DegenerateInput(f"need at least 2 blocks, got {n}")
    for row in matrix:
        for cell in row:
            if cell is None:
                raise DegenerateInput("matrix has missing cells")

    rank_sums = [0.0] * k
    tie_mass = 0.0
    for block in range(n):
        column = [matrix[j][block] for j in range(k)]
        ranks = average_ranks(column)
        for j in range(k):
            rank_sums[j] += ranks[j]
        counts: dict[float, int] = {}
        for value in column:
            counts[value] = counts.get(value, 0) + 1
        tie_mass += sum(t**3 - t for t in counts.values())

    q = 12.0 / (n * k * (k + 1)) * sum(r * r for r in rank_sums) - 3.0 * n * (k + 1)
    if tie_correction:
        divisor = 1.0 - tie_mass / (n * k * (k * k - 1))
        q = q / divisor if divisor > 0 else 0.0
    p = float(chi2.sf(q, k - 1))
    return FriedmanResult(q=q, p=p, rank_sums=tuple(rank_sums), k=k, n=n)
