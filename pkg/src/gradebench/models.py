"""Shared data model for graded system responses and test banks.

The interchange format is JSON-lines (optionally gzip-compressed).  Each line
of a response file is a two-element array ``[query_id, [passage, ...]]`` where
every passage carries its text, optional provenance (manual judgments, system
rankings) under ``paragraph_data``, and the grades accumulated by grading
passes (``exam_grades`` for question/nugget grading, ``grades`` for direct
relevance grading).

Unknown JSON fields are preserved verbatim so files produced by other tools
round-trip unchanged.
"""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_serializer, model_validator


class _Model(BaseModel):
    """Base: keep unknown fields, allow python-name or wire-name construction."""

    model_config = ConfigDict(extra="allow", populate_by_name=True)

    def to_wire(self) -> dict:
        return self.model_dump(by_alias=True)


class Judgment(_Model):
    """A manual relevance judgment attached to a passage.

    Grades may be negative; TREC DL uses -2..3 with 1 meaning non-relevant.
    """

    paragraph_id: str = Field(alias="paragraphId")
    query: str
    relevance: int
    title_query: str = Field(alias="titleQuery")


class RankingEntry(_Model):
    """One row of a system ranking: where a method placed this passage."""

    method: str
    paragraph_id: str = Field(alias="paragraphId")
    query_id: str = Field(alias="queryId")
    rank: int = Field(ge=1)
    score: float


class ParagraphData(_Model):
    judgments: list[Judgment] = Field(default_factory=list)
    rankings: list[RankingEntry] = Field(default_factory=list)


class SelfRating(_Model):
    """A 0-5 answerability/coverage rating for one test-bank entry.

    The wire format uses ``question_id`` or ``nugget_id`` depending on the
    entry kind; exactly one of them is set.
    """

    question_id: Optional[str] = None
    nugget_id: Optional[str] = None
    self_rating: int = Field(ge=0, le=5)

    @property
    def entry_id(self) -> str:
        entry = self.question_id if self.question_id is not None else self.nugget_id
        if entry is None:
            raise ValueError("self rating carries neither question_id nor nugget_id")
        return entry

    @model_validator(mode="after")
    def _one_id(self) -> "SelfRating":
        if self.question_id is None and self.nugget_id is None:
            raise ValueError("self rating needs a question_id or nugget_id")
        return self

    @model_serializer(mode="wrap")
    def _drop_unused_id(self, handler):
        data = handler(self)
        for key in ("question_id", "nugget_id"):
            if key in data and data[key] is None:
                del data[key]
        return data


class PromptInfo(_Model):
    """Which prompt produced a grade, and the checks that were in effect."""

    prompt_class: str
    prompt_style: str = ""
    context_first: bool = False
    check_unanswerable: bool = False
    check_answer_key: bool = False
    is_self_rated: bool = False


def compute_exam_ratio(n_correct: int, n_wrong: int) -> float:
    """Fraction of graded entries answered correctly; 0 when nothing graded."""
    total = n_correct + n_wrong
    return n_correct / total if total > 0 else 0.0


class ExamGrade(_Model):
    """One grading pass over a passage with a question/nugget test bank."""

    correct_answered: list[str] = Field(alias="correctAnswered", default_factory=list)
    wrong_answered: list[str] = Field(alias="wrongAnswered", default_factory=list)
    self_ratings: list[SelfRating] = Field(default_factory=list)
    answers: list[tuple[str, str]] = Field(default_factory=list)
    llm: str = ""
    prompt_info: PromptInfo
    exam_ratio: float = Field(ge=0.0, le=1.0, default=0.0)

    @model_validator(mode="after")
    def _disjoint(self) -> "ExamGrade":
        overlap = set(self.correct_answered) & set(self.wrong_answered)
        if overlap:
            raise ValueError(f"entries graded both correct and wrong: {sorted(overlap)}")
        return self

    def rating_for(self, entry_id: str) -> Optional[int]:
        best = None
        for rating in self.self_ratings:
            if rating.entry_id == entry_id:
                if best is None or rating.self_rating > best:
                    best = rating.self_rating
        return best

    def answer_for(self, entry_id: str) -> Optional[str]:
        for eid, text in self.answers:
            if eid == entry_id:
                return text
        return None


class DirectGrade(_Model):
    """A passage-level relevance verdict from a direct grading prompt.

    Wire names mirror the exam grade (``correctAnswered``/``self_ratings``/
    ``answers``) but carry scalars instead of lists.
    """

    correct_answered: bool = Field(alias="correctAnswered")
    self_ratings: int = 0
    answers: str = ""
    llm: str = ""
    prompt_info: PromptInfo

    @property
    def self_rating(self) -> int:
        return self.self_ratings

    @property
    def answer(self) -> str:
        return self.answers


class GradedPassage(_Model):
    """A system-response passage with provenance and accumulated grades."""

    paragraph_id: str = Field(min_length=1)
    text: str
    paragraph: Any = None  # optional markup payload, passed through untouched
    paragraph_data: ParagraphData = Field(default_factory=ParagraphData)
    exam_grades: list[ExamGrade] = Field(default_factory=list)
    grades: list[DirectGrade] = Field(default_factory=list)

    @property
    def judgments(self) -> list[Judgment]:
        return self.paragraph_data.judgments

    @property
    def rankings(self) -> list[RankingEntry]:
        return self.paragraph_data.rankings

    @model_serializer(mode="wrap")
    def _drop_empty_markup(self, handler):
        data = handler(self)
        if "paragraph" in data and data["paragraph"] is None:
            del data["paragraph"]
        return data


class QueryResponseSet(_Model):
    """All graded passages for one query; one line of a response file."""

    query_id: str
    passages: list[GradedPassage]

    @model_validator(mode="after")
    def _unique_passages(self) -> "QueryResponseSet":
        seen = set()
        for passage in self.passages:
            if passage.paragraph_id in seen:
                raise ValueError(f"duplicate paragraph_id {passage.paragraph_id!r}")
            seen.add(passage.paragraph_id)
        return self


class TestBankEntry(_Model):
    """One exam question or nugget; the unit of grading."""

    entry_id: str = Field(min_length=1)
    query_id: str
    kind: Literal["question", "nugget"]
    text: str = Field(min_length=1)
    choices: Optional[list[str]] = None
    gold_answers: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _nuggets_have_no_choices(self) -> "TestBankEntry":
        if self.kind == "nugget" and self.choices is not None:
            raise ValueError("nugget entries cannot carry answer choices")
        return self


class QueryTestBank(_Model):
    """The test bank for one query: all questions, or all nuggets."""

    query_id: str
    query_text: str
    prompt_target: Literal["questions", "nuggets"]
    items: list[TestBankEntry] = Field(default_factory=list)

    @model_validator(mode="after")
    def _consistent(self) -> "QueryTestBank":
        want_kind = "question" if self.prompt_target == "questions" else "nugget"
        for item in self.items:
            if item.query_id != self.query_id:
                raise ValueError(
                    f"entry {item.entry_id} belongs to query {item.query_id!r}, "
                    f"not {self.query_id!r}"
                )
            if item.kind != want_kind:
                raise ValueError(f"entry {item.entry_id} is a {item.kind}; bank holds {self.prompt_target}")
        seen = set()
        for item in self.items:
            if item.entry_id in seen:
                raise ValueError(f"duplicate entry_id {item.entry_id!r}")
            seen.add(item.entry_id)
        return self

    def entry(self, entry_id: str) -> TestBankEntry:
        for item in self.items:
            if item.entry_id == entry_id:
                return item
        raise KeyError(entry_id)

    def has_entry(self, entry_id: str) -> bool:
        return any(item.entry_id == entry_id for item in self.items)
