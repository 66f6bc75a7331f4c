"""Shared fixture builders for the test suite."""

from importlib import resources
from pathlib import Path

import pytest

from gradebench.models import (
    ExamGrade,
    GradedPassage,
    Judgment,
    ParagraphData,
    PromptInfo,
    QueryResponseSet,
    QueryTestBank,
    RankingEntry,
    SelfRating,
    TestBankEntry,
    compute_exam_ratio,
)


def make_prompt_info(prompt_class="QuestionSelfRatedUnanswerablePromptWithChoices",
                     is_self_rated=True, **kwargs):
    return PromptInfo(
        prompt_class=prompt_class,
        prompt_style=kwargs.pop("prompt_style", "Can the question be answered?"),
        is_self_rated=is_self_rated,
        **kwargs,
    )


def make_grade(ratings=None, answers=None, correct=(), wrong=(), llm="flan-t5-large",
               prompt_class="QuestionSelfRatedUnanswerablePromptWithChoices",
               is_self_rated=True, kind="question"):
    """ExamGrade from a {entry_id: rating} map and an {entry_id: answer} map."""
    key = "nugget_id" if kind == "nugget" else "question_id"
    self_ratings = [
        SelfRating(**{key: entry_id, "self_rating": rating})
        for entry_id, rating in sorted((ratings or {}).items())
    ]
    return ExamGrade(
        correctAnswered=sorted(correct),
        wrongAnswered=sorted(wrong),
        self_ratings=self_ratings,
        answers=sorted((answers or {}).items()),
        llm=llm,
        prompt_info=make_prompt_info(prompt_class, is_self_rated),
        exam_ratio=compute_exam_ratio(len(correct), len(wrong)),
    )


def make_passage(paragraph_id, text="some passage text", judgment=None, rankings=(),
                 grades=(), query_id="q1"):
    """judgment: int relevance or None; rankings: [(method, rank, score)]."""
    judgments = []
    if judgment is not None:
        judgments.append(
            Judgment(paragraphId=paragraph_id, query=query_id,
                     relevance=judgment, titleQuery=query_id)
        )
    ranking_entries = [
        RankingEntry(method=m, paragraphId=paragraph_id, queryId=query_id, rank=r, score=s)
        for m, r, s in rankings
    ]
    return GradedPassage(
        paragraph_id=paragraph_id,
        text=text,
        paragraph_data=ParagraphData(judgments=judgments, rankings=ranking_entries),
        exam_grades=list(grades),
    )


def make_bank(query_id="q1", query_text="a toy query", texts=(), kind="question",
              gold=None):
    from gradebench.testbank import entry_id_for

    items = [
        TestBankEntry(
            entry_id=entry_id_for(query_id, text),
            query_id=query_id,
            kind=kind,
            text=text,
            gold_answers=(gold or {}).get(text, []),
        )
        for text in texts
    ]
    return QueryTestBank(
        query_id=query_id,
        query_text=query_text,
        prompt_target="questions" if kind == "question" else "nuggets",
        items=items,
    )


def make_record(query_id="q1", passages=()):
    return QueryResponseSet(query_id=query_id, passages=list(passages))


@pytest.fixture
def toy_dir() -> Path:
    return Path(str(resources.files("gradebench") / "data" / "toy"))
