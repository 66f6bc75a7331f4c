"""Label derivation and qrels export."""

import pytest

from gradebench.evaluation import derive_labels, export_qrels, parse_qrels, passage_label
from gradebench.response_file import GradeFilter

from conftest import make_bank, make_grade, make_passage, make_record


def rated_passage(ratings, pid="p1"):
    bank_ids = {f"q1/{i:02d}": r for i, r in enumerate(ratings)}
    return make_passage(pid, grades=[make_grade(bank_ids)])


def test_max_grade_is_maximum_for_min_answers_one():
    assert passage_label(rated_passage([5, 2, 0]), min_answers=1) == 5


def test_max_grade_second_largest_for_min_answers_two():
    assert passage_label(rated_passage([5, 2, 0]), min_answers=2) == 2


def test_max_grade_runs_out_of_ratings():
    assert passage_label(rated_passage([5, 2]), min_answers=3) == 0


def test_count_covered():
    passage = rated_passage([5, 4, 4, 1])
    assert passage_label(passage, scheme="count_covered", min_rating=4) == 3
    assert passage_label(passage, scheme="count_covered", min_rating=5) == 1


def test_label_equivalent_threshold_formulation():
    # the m-th largest rating is the largest L with >= m entries rated >= L
    ratings = [5, 4, 4, 2, 1, 0]
    passage = rated_passage(ratings)
    for m in range(1, len(ratings) + 1):
        label = passage_label(passage, min_answers=m)
        best = max((l for l in range(6) if sum(r >= l for r in ratings) >= m), default=0)
        assert label == best


def test_hole_labels_zero():
    passage = make_passage("p1")  # no grades at all
    assert passage_label(passage) == 0
    graded = rated_passage([3])
    assert passage_label(graded, GradeFilter(prompt_class="Other")) == 0


def test_monotone_in_min_answers():
    passage = rated_passage([5, 4, 3, 2, 1])
    labels = [passage_label(passage, min_answers=m) for m in range(1, 7)]
    assert labels == sorted(labels, reverse=True)


def test_correct_answered_counts_as_five():
    grade = make_grade(correct=["q1/aa"], wrong=["q1/bb"])
    passage = make_passage("p1", grades=[grade])
    assert passage_label(passage, min_answers=1) == 5
    assert passage_label(passage, min_answers=2) == 0


def test_export_qrels_format_and_determinism(tmp_path):
    records = [
        make_record("q1", [rated_passage([3, 1], "p1"), rated_passage([0], "p2")]),
    ]
    out = tmp_path / "x.qrels"
    labels = export_qrels(records, out, min_answers=1)
    assert labels == [("q1", "p1", 3), ("q1", "p2", 0)]
    assert out.read_text(encoding="utf-8") == "q1 0 p1 3\nq1 0 p2 0\n"
    again = tmp_path / "y.qrels"
    export_qrels(records, again, min_answers=1)
    assert out.read_bytes() == again.read_bytes()


def test_exported_qrels_reparse_losslessly(tmp_path):
    records = [
        make_record("q1", [rated_passage([5, 4], "p1"), rated_passage([2], "p2")]),
        make_record("q2", [rated_passage([0], "p9")]),
    ]
    out = tmp_path / "z.qrels"
    labels = export_qrels(records, out)
    parsed = [(j.query, j.paragraph_id, j.relevance) for j in parse_qrels(out)]
    assert parsed == labels


def test_derive_labels_covers_every_passage():
    records = [make_record("q1", [rated_passage([1], "p1"), make_passage("p2")])]
    labels = derive_labels(records)
    assert labels == [("q1", "p1", 1), ("q1", "p2", 0)]
