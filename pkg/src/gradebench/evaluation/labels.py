"""Deriving passage-level relevance labels from grades, and qrels export.

A passage's label under the ``max_grade`` scheme is the min_answers-th
largest of its per-entry ratings (the largest level L such that at least
min_answers entries are rated >= L); under ``count_covered`` it is the
number of entries rated at or above the rating threshold.

Entries verified correct by an answer key count as rating 5 and entries
verified wrong as rating 0 when no self-rating is available for them.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from ..models import GradedPassage, QueryResponseSet
from ..response_file import GradeFilter, select_direct_grades, select_grades
from .trec import write_qrels

PathLike = Union[str, Path]

LABEL_SCHEMES = ("max_grade", "count_covered")


def entry_ratings(passage: GradedPassage, grade_filter: GradeFilter = GradeFilter()) -> dict[str, int]:
    """Best rating per test-bank entry across all matching exam grades."""
    ratings: dict[str, int] = {}

    def bump(entry_id: str, value: int):
        if value > ratings.get(entry_id, -1):
            ratings[entry_id] = value

    for grade in select_grades(passage, grade_filter):
        for rating in grade.self_ratings:
            bump(rating.entry_id, rating.self_rating)
        rated = {r.entry_id for r in grade.self_ratings}
        for entry_id in grade.correct_answered:
            if entry_id not in rated:
                bump(entry_id, 5)
        for entry_id in grade.wrong_answered:
            if entry_id not in rated:
                bump(entry_id, 0)
    return ratings


def rating_values(passage: GradedPassage, grade_filter: GradeFilter = GradeFilter()) -> list[int]:
    """All rating values feeding label derivation (entry-best plus direct)."""
    values = sorted(entry_ratings(passage, grade_filter).values())
    values.extend(g.self_ratings for g in select_direct_grades(passage, grade_filter))
    return values


def has_matching_grades(passage: GradedPassage, grade_filter: GradeFilter = GradeFilter()) -> bool:
    return bool(select_grades(passage, grade_filter)) or bool(
        select_direct_grades(passage, grade_filter)
    )


def passage_label(
    passage: GradedPassage,
    grade_filter: GradeFilter = GradeFilter(),
    scheme: str = "max_grade",
    min_rating: int = 4,
    min_answers: int = 1,
) -> int:
    """Relevance label for one passage; 0 when no grade matches (a "hole")."""
    if scheme not in LABEL_SCHEMES:
        raise ValueError(f"unknown label scheme {scheme!r}")
    if min_answers < 1:
        raise ValueError("min_answers must be >= 1")
    values = rating_values(passage, grade_filter)
    if scheme == "count_covered":
        return sum(1 for value in values if value >= min_rating)
    if len(values) < min_answers:
        return 0
    return sorted(values, reverse=True)[min_answers - 1]


def derive_labels(
    responses: list[QueryResponseSet],
    grade_filter: GradeFilter = GradeFilter(),
    scheme: str = "max_grade",
    min_rating: int = 4,
    min_answers: int = 1,
) -> list[tuple[str, str, int]]:
    """One (query_id, paragraph_id, label) triple per passage."""
    return [
        (
            record.query_id,
            passage.paragraph_id,
            passage_label(passage, grade_filter, scheme, min_rating, min_answers),
        )
        for record in responses
        for passage in record.passages
    ]


def export_qrels(
    responses: list[QueryResponseSet],
    path: PathLike,
    grade_filter: GradeFilter = GradeFilter(),
    scheme: str = "max_grade",
    min_rating: int = 4,
    min_answers: int = 1,
) -> list[tuple[str, str, int]]:
    """Write derived labels as a trec_eval-compatible qrels file."""
    labels = derive_labels(responses, grade_filter, scheme, min_rating, min_answers)
    write_qrels(labels, path)
    return labels


def qrels_file_name(
    prefix: str, prompt_class: Optional[str], min_rating: int, kind: str = "qrels"
) -> str:
    """File naming convention for exported evaluation artifacts."""
    prompt_part = prompt_class or "all"
    if kind == "qrels":
        return f"{prefix}-rubric-qrels-{prompt_part}-minrating-{min_rating}.solo.qrels"
    if kind == "qrels-leaderboard":
        return f"{prefix}-rubric-qrels-leaderboard-{prompt_part}-minrating-{min_rating}.solo.mrr.tsv"
    if kind == "cover-leaderboard":
        return f"{prefix}-rubric-cover-leaderboard-{prompt_part}-minrating-{min_rating}.solo.tsv"
    if kind == "correlation":
        return f"{prefix}-rubric-qrels-leaderboard-{prompt_part}-minlevel-{min_rating}.correlation.tsv"
    if kind == "inter-annotator":
        return f"{prefix}-rubric-inter-annotator-{prompt_part}.txt"
    raise ValueError(f"unknown artifact kind {kind!r}")
