"""Rank correlation and inter-annotator agreement statistics.

Spearman uses fractional (tie-averaged) ranks; Kendall is the tie-corrected
tau-b.  Intermediate sums are kept in exact rational/integer arithmetic and
converted to float only at the end, so results are reproducible to the bit
across platforms.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from ..errors import CorrelationError, GradebenchError


def fractional_ranks(values: Sequence) -> list[Fraction]:
    """1-based ranks; tied values share the average of their positions."""
    n = len(values)
    order = sorted(range(n), key=lambda i: values[i])
    ranks: list[Fraction] = [Fraction(0)] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        shared = Fraction(i + j + 2, 2)  # average of ranks i+1 .. j+1
        for k in range(i, j + 1):
            ranks[order[k]] = shared
        i = j + 1
    return ranks


def _check_pair(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise CorrelationError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise CorrelationError("need at least two observations")


def spearman(a: Sequence, b: Sequence) -> float:
    """Pearson correlation of the fractional ranks of a and b."""
    _check_pair(a, b)
    ra, rb = fractional_ranks(a), fractional_ranks(b)
    n = len(a)
    mean_a = sum(ra) / n
    mean_b = sum(rb) / n
    sxy = sum((x - mean_a) * (y - mean_b) for x, y in zip(ra, rb))
    sxx = sum((x - mean_a) ** 2 for x in ra)
    syy = sum((y - mean_b) ** 2 for y in rb)
    if sxx == 0 or syy == 0:
        raise CorrelationError("correlation undefined: an input has no variation")
    return float(sxy) / math.sqrt(float(sxx * syy))


def _tie_count(values: Sequence) -> int:
    """Sum of t*(t-1)/2 over groups of equal values."""
    groups: dict = {}
    for value in values:
        groups[value] = groups.get(value, 0) + 1
    return sum(t * (t - 1) // 2 for t in groups.values())


def _count_inversions(seq: list) -> int:
    """Pairs (i < j) with seq[i] > seq[j], by mergesort; equal values do not count."""
    if len(seq) <= 1:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    inversions = _count_inversions(left) + _count_inversions(right)
    merged = []
    i = j = 0
    while i < len(left) and j < len(right):
        if right[j] < left[i]:
            inversions += len(left) - i
            merged.append(right[j])
            j += 1
        else:
            merged.append(left[i])
            i += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    seq[:] = merged
    return inversions


def kendall_tau(a: Sequence, b: Sequence) -> float:
    """Kendall's tau-b via mergesort inversion counting."""
    _check_pair(a, b)
    n = len(a)
    order = sorted(range(n), key=lambda i: (a[i], b[i]))
    a_sorted = [a[i] for i in order]
    b_by_a = [b[i] for i in order]

    n0 = n * (n - 1) // 2
    n1 = _tie_count(a_sorted)
    n2 = _tie_count(b_by_a)
    n3 = _tie_count(list(zip(a_sorted, b_by_a)))
    if n0 == n1 or n0 == n2:
        raise CorrelationError("correlation undefined: an input has no variation")

    discordant = _count_inversions(list(b_by_a))
    concordant = n0 - n1 - n2 + n3 - discordant
    return (concordant - discordant) / math.sqrt((n0 - n1) * (n0 - n2))


def cohen_kappa(tp: int, fp: int, fn: int, tn: int) -> float:
    """Cohen's kappa for a 2x2 label-vs-judgment table.

    kappa = (p_o - p_e) / (1 - p_e) with the expected agreement p_e from the
    row/column marginals; 0 when p_e = 1 (a degenerate single-cell table).
    """
    counts = (tp, fp, fn, tn)
    if any(c < 0 for c in counts):
        raise GradebenchError("contingency counts must be non-negative")
    total = sum(counts)
    if total == 0:
        raise GradebenchError("contingency table is empty")
    p_observed = Fraction(tp + tn, total)
    p_expected = Fraction(
        (tp + fp) * (tp + fn) + (fn + tn) * (fp + tn), total * total
    )
    if p_expected == 1:
        return 0.0
    return float((p_observed - p_expected) / (1 - p_expected))
