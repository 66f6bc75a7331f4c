"""gradebench: autograde retrieval/generation responses against a test bank.

Workflow: generate or import a test bank of exam questions and nuggets
(phase 1), grade every response passage against it with an LLM backend
(phase 2), review the grading with the oversight reports or the web UI
(phase 3), and export relevance labels, leaderboards, coverage scores, and
agreement statistics (phase 4).
"""

__version__ = "0.1.0"

from .models import (
    DirectGrade,
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
)
from .response_file import (
    GradeFilter,
    load_queries,
    read_response_file,
    select_grades,
    write_response_file,
)

__all__ = [
    "DirectGrade",
    "ExamGrade",
    "GradeFilter",
    "GradedPassage",
    "Judgment",
    "ParagraphData",
    "PromptInfo",
    "QueryResponseSet",
    "QueryTestBank",
    "RankingEntry",
    "SelfRating",
    "TestBankEntry",
    "load_queries",
    "read_response_file",
    "select_grades",
    "write_response_file",
]
