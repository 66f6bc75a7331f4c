"""Correlations and kappa against brute-force oracles and published values."""

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradebench.errors import CorrelationError, GradebenchError
from gradebench.evaluation import cohen_kappa, fractional_ranks, kendall_tau, spearman


# ---------------------------------------------------------------------------
# Oracles (independent O(n^2) pair counting and rank averaging)


def oracle_ranks(values):
    return [
        Fraction(sum(1 for other in values if other < v), 1)
        + Fraction(sum(1 for other in values if other == v) + 1, 2)
        for v in values
    ]


def oracle_spearman(a, b):
    ra, rb = oracle_ranks(a), oracle_ranks(b)
    n = len(a)
    sum_a, sum_b = sum(ra), sum(rb)
    sxy = sum(x * y for x, y in zip(ra, rb)) - Fraction(sum_a * sum_b, n)
    sxx = sum(x * x for x in ra) - Fraction(sum_a * sum_a, n)
    syy = sum(y * y for y in rb) - Fraction(sum_b * sum_b, n)
    if sxx == 0 or syy == 0:
        raise ZeroDivisionError
    return float(sxy) / math.sqrt(float(sxx * syy))


def oracle_kendall(a, b):
    concordant = discordant = 0
    n = len(a)
    n0 = n * (n - 1) // 2
    ties_a = ties_b = 0
    for i in range(n):
        for j in range(i + 1, n):
            da, db = a[i] - a[j], b[i] - b[j]
            if da == 0:
                ties_a += 1
            if db == 0:
                ties_b += 1
            if da * db > 0:
                concordant += 1
            elif da * db < 0:
                discordant += 1
    return (concordant - discordant) / math.sqrt((n0 - ties_a) * (n0 - ties_b))


# ---------------------------------------------------------------------------
# Spearman / Kendall


def test_identical_orderings_are_one():
    a = [1.0, 2.0, 3.0, 4.0]
    assert spearman(a, a) == pytest.approx(1.0)
    assert kendall_tau(a, a) == pytest.approx(1.0)


def test_reversed_orderings_are_minus_one():
    a = [1, 2, 3, 4, 5]
    b = [5, 4, 3, 2, 1]
    assert spearman(a, b) == pytest.approx(-1.0)
    assert kendall_tau(a, b) == pytest.approx(-1.0)


def test_adjacent_swap_tau():
    # n=4 with one adjacent swap: 5 concordant, 1 discordant of 6 pairs
    assert kendall_tau([1, 2, 3, 4], [1, 2, 4, 3]) == pytest.approx((5 - 1) / 6)


def test_fractional_ranks_average_ties():
    assert fractional_ranks([10, 20, 20, 30]) == [
        Fraction(1),
        Fraction(5, 2),
        Fraction(5, 2),
        Fraction(4),
    ]


def test_errors():
    with pytest.raises(CorrelationError):
        spearman([1, 2], [1, 2, 3])
    with pytest.raises(CorrelationError):
        spearman([1], [1])
    with pytest.raises(CorrelationError):
        spearman([2, 2, 2], [1, 2, 3])
    with pytest.raises(CorrelationError):
        kendall_tau([2, 2, 2], [1, 2, 3])


def test_oracle_equivalence_random_vectors_with_ties():
    rng = random.Random(20240901)
    checked = 0
    for _ in range(1000):
        n = rng.randint(2, 12)
        a = [rng.randint(0, 6) for _ in range(n)]
        b = [rng.randint(0, 6) for _ in range(n)]
        if len(set(a)) < 2 or len(set(b)) < 2:
            continue
        assert spearman(a, b) == oracle_spearman(a, b)
        assert kendall_tau(a, b) == oracle_kendall(a, b)
        checked += 1
    assert checked > 800


@given(
    st.lists(st.integers(0, 9), min_size=2, max_size=12),
    st.data(),
)
@settings(max_examples=200, deadline=None)
def test_rank_invariance_under_monotone_transform(a, data):
    b = data.draw(st.lists(st.integers(0, 9), min_size=len(a), max_size=len(a)))
    if len(set(a)) < 2 or len(set(b)) < 2:
        return
    transformed_a = [10 * x + 3 for x in a]  # strictly monotone
    transformed_b = [x * x for x in b]  # monotone on the non-negative ints
    assert spearman(transformed_a, b) == pytest.approx(spearman(a, b), abs=1e-12)
    assert spearman(a, transformed_b) == pytest.approx(spearman(a, b), abs=1e-12)
    assert kendall_tau(transformed_a, transformed_b) == pytest.approx(
        kendall_tau(a, b), abs=1e-12
    )


# ---------------------------------------------------------------------------
# Cohen's kappa


def test_kappa_reproduces_published_inter_annotator_values():
    assert cohen_kappa(998, 2377, 668, 7343) == pytest.approx(0.25, abs=0.005)
    assert cohen_kappa(1211, 4095, 455, 5625) == pytest.approx(0.16, abs=0.005)


def test_kappa_perfect_agreement():
    assert cohen_kappa(10, 0, 0, 25) == pytest.approx(1.0)


def test_kappa_chance_only_agreement_is_zero():
    # independent marginals: observed equals expected
    assert cohen_kappa(9, 3, 3, 1) == pytest.approx(0.0)


def test_kappa_degenerate_table_is_zero():
    assert cohen_kappa(7, 0, 0, 0) == 0.0


def test_kappa_errors_on_empty_table():
    with pytest.raises(GradebenchError):
        cohen_kappa(0, 0, 0, 0)
    with pytest.raises(GradebenchError):
        cohen_kappa(-1, 1, 1, 1)


@given(st.integers(1, 500), st.integers(0, 500), st.integers(0, 500), st.integers(0, 500),
       st.integers(2, 9))
@settings(max_examples=200, deadline=None)
def test_kappa_invariant_under_uniform_scaling(tp, fp, fn, tn, factor):
    base = cohen_kappa(tp, fp, fn, tn)
    scaled = cohen_kappa(tp * factor, fp * factor, fn * factor, tn * factor)
    assert scaled == pytest.approx(base, abs=1e-12)


def oracle_kappa(tp, fp, fn, tn):
    """Textbook formula with plain float arithmetic."""
    n = tp + fp + fn + tn
    po = (tp + tn) / n
    pe = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / (n * n)
    return (po - pe) / (1 - pe)


@given(st.integers(0, 300), st.integers(0, 300), st.integers(0, 300), st.integers(1, 300))
@settings(max_examples=300, deadline=None)
def test_kappa_matches_float_oracle(tp, fp, fn, tn):
    n = tp + fp + fn + tn
    pe = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / (n * n)
    if pe == 1.0:
        return
    assert cohen_kappa(tp, fp, fn, tn) == pytest.approx(oracle_kappa(tp, fp, fn, tn), abs=1e-9)
