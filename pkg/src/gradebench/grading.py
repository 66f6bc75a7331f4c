"""Phase 2: grade every system-response passage against the test bank.

Long responses are first segmented into paragraph-sized passages.  Every
(passage, entry) pair is then graded in one of four modes:

* ``self_rated``: the backend rates answerability/coverage 0-5,
* ``extract_and_verify``: the backend answers the question and the answer is
  checked against the gold answer key (stemmed edit-distance similarity,
  falling back to a backend equivalence check) and/or scanned for
  unanswerable phrasings,
* ``extract_informational``: answers are extracted for manual review only,
* ``direct``: the backend judges passage relevance for the query without a
  test bank.

Each graded passage gains exactly one new grade record per job; existing
grade lists are appended to, never replaced.
"""

from __future__ import annotations

import hashlib
import re
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .backends import Backend
from .errors import GradebenchError, JobAbortedError
from .models import (
    DirectGrade,
    ExamGrade,
    GradedPassage,
    PromptInfo,
    QueryResponseSet,
    QueryTestBank,
    SelfRating,
    TestBankEntry,
    compute_exam_ratio,
)
from .prompts import (
    DEFAULT_WORD_BUDGET,
    EQUIVALENCE_PROMPT,
    PromptTemplate,
    parse_self_rating_verbose,
    render_prompt,
    token_count,
)
from .textmatch import normalize_answer, similarity

# ---------------------------------------------------------------------------
# Response segmentation

DEFAULT_SEGMENT_TOKENS = 400

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")
_PARAGRAPH_SPLIT = re.compile(r"\n\s*\n")


def passage_id_for(text: str) -> str:
    return hashlib.md5(text.encode("utf-8")).hexdigest()


def _pack(atoms: list[str], target: int, joiner: str) -> list[str]:
    """Greedily pack consecutive atoms while the word total stays <= target."""
    packed: list[str] = []
    buffer: list[str] = []
    used = 0
    for atom in atoms:
        need = token_count(atom)
        if buffer and used + need > target:
            packed.append(joiner.join(buffer))
            buffer, used = [], 0
        buffer.append(atom)
        used += need
    if buffer:
        packed.append(joiner.join(buffer))
    return packed


def _split_oversized_sentence(sentence: str, target: int) -> list[str]:
    words = sentence.split()
    return [" ".join(words[i : i + target]) for i in range(0, len(words), target)]


def segment_text(text: str, target_tokens: int = DEFAULT_SEGMENT_TOKENS) -> list[tuple[str, str]]:
    """Split a response into roughly target-sized passages.

    Paragraphs are packed whole; a paragraph longer than the target is split
    at sentence boundaries, and a single oversized sentence is hard-split at
    word boundaries.  Returns (passage_text, passage_id) pairs; the id is a
    digest of the passage text.
    """
    if target_tokens < 1:
        raise ValueError("target_tokens must be at least 1")
    if not text.strip():
        return []

    segments: list[str] = []
    pending_paragraphs: list[str] = []

    def flush_paragraphs():
        segments.extend(_pack(pending_paragraphs, target_tokens, "\n\n"))
        pending_paragraphs.clear()

    for paragraph in (p for p in _PARAGRAPH_SPLIT.split(text) if p.strip()):
        if token_count(paragraph) <= target_tokens:
            pending_paragraphs.append(paragraph.strip())
            continue
        flush_paragraphs()
        sentences: list[str] = []
        for sentence in (s for s in _SENTENCE_SPLIT.split(paragraph.strip()) if s.strip()):
            if token_count(sentence) <= target_tokens:
                sentences.append(sentence)
            else:
                sentences.extend(_split_oversized_sentence(sentence, target_tokens))
        segments.extend(_pack(sentences, target_tokens, " "))
    flush_paragraphs()
    return [(segment, passage_id_for(segment)) for segment in segments]


# ---------------------------------------------------------------------------
# Answer verification

ANSWER_SIMILARITY_THRESHOLD = 0.8

UNANSWERABLE_EXPRESSIONS = (
    "unanswerable",
    "no answer",
    "not enough information",
    "unknown",
    "it is not possible to tell",
    "it does not say",
    "no relevant information",
    "no",  # standalone word only, so "north" etc. stay answerable
)

_UNANSWERABLE_PATTERNS = [
    re.compile(r"\b" + re.escape(expr) + r"\b") for expr in UNANSWERABLE_EXPRESSIONS
]

# A bare option marker: one letter or a roman numeral with optional punctuation.
_ROMAN = r"m{0,4}(?:cm|cd|d?c{0,3})(?:xc|xl|l?x{0,3})(?:ix|iv|v?i{0,3})"
_INVALID_ANSWER = re.compile(r"[\(\[\s]*(?:[a-z]|(?=[ivxlcdm])" + _ROMAN + r")[\)\]\s]*[.:]?\s*$")


def is_unanswerable(answer: str) -> bool:
    """True when the answer signals that the question cannot be answered.

    Scans for the unanswerability expressions (whole answer or contained at
    word boundaries) and for invalid bare option markers like "a." or "(iii)".
    Empty answers count as unanswerable.
    """
    normalized = answer.strip().lower()
    if not normalized:
        return True
    if _INVALID_ANSWER.fullmatch(normalized):
        return True
    return any(pattern.search(normalized) for pattern in _UNANSWERABLE_PATTERNS)


def verify_answer_key(
    answer: str, gold_answers: list[str], threshold: float = ANSWER_SIMILARITY_THRESHOLD
) -> bool:
    """Stemmed edit-distance check against any gold answer.

    Both sides are lowercased, Porter-stemmed word by word, and compared with
    normalized similarity 1 - editdist/max(len); a similarity of `threshold`
    or above counts as correct.
    """
    if not gold_answers:
        raise ValueError("gold_answers must be non-empty")
    normalized = normalize_answer(answer)
    return any(
        similarity(normalized, normalize_answer(gold)) >= threshold for gold in gold_answers
    )


def _says_yes(completion: str) -> bool:
    words = completion.split()
    return bool(words) and words[0].strip(string.punctuation).lower() == "yes"


def llm_answer_equivalence(question: str, gold: str, answer: str, backend: Backend) -> bool:
    """Ask the backend whether the answer is equally correct; yes/no parse."""
    prompt = EQUIVALENCE_PROMPT.format(question=question, correct_answer=gold, answer=answer)
    return _says_yes(backend.complete(prompt))


# ---------------------------------------------------------------------------
# Grading jobs

GRADING_MODES = ("self_rated", "extract_and_verify", "extract_informational", "direct")


def grade_passage_self_rated(
    entry: TestBankEntry,
    passage: GradedPassage,
    template: PromptTemplate,
    backend: Backend,
    budget: int = DEFAULT_WORD_BUDGET,
) -> tuple[SelfRating, str]:
    """Rate one (entry, passage) pair; the raw completion is kept for review."""
    prompt = render_prompt(template, entry.text, passage.text, budget)
    completion = backend.complete(prompt)
    rating, _ = parse_self_rating_verbose(completion)
    key = "nugget_id" if entry.kind == "nugget" else "question_id"
    return SelfRating(**{key: entry.entry_id, "self_rating": rating}), completion


@dataclass
class GradingJob:
    responses: list[QueryResponseSet]
    banks: list[QueryTestBank]
    template: PromptTemplate
    backend: Backend
    mode: str = "self_rated"
    queries: Optional[dict[str, str]] = None  # required for direct mode
    budget: int = DEFAULT_WORD_BUDGET
    check_unanswerable: Optional[bool] = None
    check_answer_key: Optional[bool] = None
    use_llm_equivalence: bool = True
    llm_equivalence_first: bool = False
    direct_min_rating: int = 1
    max_failure_fraction: float = 0.10
    jobs: int = 1

    def __post_init__(self):
        if self.mode not in GRADING_MODES:
            raise GradebenchError(f"unknown grading mode {self.mode!r}")
        if self.check_unanswerable is None:
            self.check_unanswerable = self.mode == "extract_and_verify"
        if self.check_answer_key is None:
            self.check_answer_key = self.mode == "extract_and_verify" and any(
                entry.gold_answers for bank in self.banks for entry in bank.items
            )

    def validate(self) -> None:
        by_query = {bank.query_id: bank for bank in self.banks}
        if self.mode == "direct":
            missing = [
                r.query_id
                for r in self.responses
                if (self.queries or {}).get(r.query_id) is None
                and r.query_id not in by_query
            ]
            if missing:
                raise GradebenchError(f"no query text for queries: {missing}")
            return
        missing = [r.query_id for r in self.responses if r.query_id not in by_query]
        if missing:
            raise GradebenchError(f"no test bank for queries: {missing}")
        if self.mode == "extract_and_verify" and not self.check_unanswerable:
            lacking = [
                entry.entry_id
                for r in self.responses
                for entry in by_query[r.query_id].items
                if not entry.gold_answers
            ]
            if lacking:
                raise GradebenchError(
                    "extract_and_verify without check_unanswerable needs gold answers "
                    f"for every entry; missing for: {lacking[:5]}"
                )


@dataclass
class GradingOutcome:
    responses: list[QueryResponseSet]
    manifest: dict
    failures: list[dict] = field(default_factory=list)


def _prompt_info(job: GradingJob) -> PromptInfo:
    return PromptInfo(
        prompt_class=job.template.prompt_class,
        prompt_style=job.template.prompt_style,
        context_first=job.template.context_first,
        check_unanswerable=bool(job.check_unanswerable and job.mode != "self_rated"),
        check_answer_key=bool(job.check_answer_key and job.mode == "extract_and_verify"),
        is_self_rated=job.template.is_self_rated,
    )


@dataclass
class _PairResult:
    entry_id: str
    rating: Optional[SelfRating] = None
    answer: Optional[str] = None
    correct: Optional[bool] = None


def _grade_pair(job: GradingJob, entry: TestBankEntry, passage: GradedPassage) -> _PairResult:
    if job.mode == "self_rated":
        rating, completion = grade_passage_self_rated(
            entry, passage, job.template, job.backend, job.budget
        )
        return _PairResult(entry.entry_id, rating=rating, answer=completion)

    prompt = render_prompt(job.template, entry.text, passage.text, job.budget)
    answer = job.backend.complete(prompt)
    if job.mode == "extract_informational":
        return _PairResult(entry.entry_id, answer=answer)

    correct = True
    if job.check_answer_key and entry.gold_answers:
        checks = [
            lambda: verify_answer_key(answer, entry.gold_answers),
            lambda: job.use_llm_equivalence
            and any(
                llm_answer_equivalence(entry.text, gold, answer, job.backend)
                for gold in entry.gold_answers
            ),
        ]
        if job.llm_equivalence_first:
            checks.reverse()
        correct = checks[0]() or checks[1]()
    if correct and job.check_unanswerable:
        correct = not is_unanswerable(answer)
    return _PairResult(entry.entry_id, answer=answer, correct=correct)


def _grade_direct(job: GradingJob, query_text: str, passage: GradedPassage) -> DirectGrade:
    prompt = render_prompt(job.template, query_text, passage.text, job.budget)
    completion = job.backend.complete(prompt)
    if job.template.is_self_rated:
        rating, _ = parse_self_rating_verbose(completion)
        correct = rating >= job.direct_min_rating
    else:
        correct = _says_yes(completion)
        rating = 5 if correct else 0
    return DirectGrade(
        correctAnswered=correct,
        self_ratings=rating,
        answers=completion,
        llm=job.backend.identifier,
        prompt_info=_prompt_info(job),
    )


def grade_job(job: GradingJob) -> GradingOutcome:
    """Grade all responses passage by passage.

    Per-pair backend failures are recorded and skipped (the pair lands in
    neither correct nor wrong); more than ``max_failure_fraction`` of failed
    pairs aborts the whole job.
    """
    job.validate()
    responses = [record.model_copy(deep=True) for record in job.responses]
    banks = {bank.query_id: bank for bank in job.banks}
    failures: list[dict] = []

    if job.mode == "direct":
        tasks = [
            (record.query_id, passage, None)
            for record in responses
            for passage in record.passages
        ]
    else:
        tasks = [
            (record.query_id, passage, entry)
            for record in responses
            for passage in record.passages
            for entry in banks[record.query_id].items
        ]

    def run(task):
        query_id, passage, entry = task
        try:
            if entry is None:
                query_text = (job.queries or {}).get(query_id) or banks[query_id].query_text
                return task, _grade_direct(job, query_text, passage), None
            return task, _grade_pair(job, entry, passage), None
        except Exception as exc:  # noqa: BLE001 - failures are data here
            return task, None, {
                "query_id": query_id,
                "paragraph_id": passage.paragraph_id,
                "entry_id": entry.entry_id if entry is not None else None,
                "error": f"{type(exc).__name__}: {exc}",
            }

    if job.jobs > 1:
        with ThreadPoolExecutor(max_workers=job.jobs) as pool:
            outcomes = list(pool.map(run, tasks))
    else:
        outcomes = [run(task) for task in tasks]

    per_passage: dict[int, list[_PairResult]] = {}
    direct_grades: dict[int, DirectGrade] = {}
    for task, result, failure in outcomes:
        if failure is not None:
            failures.append(failure)
            continue
        _, passage, entry = task
        if entry is None:
            direct_grades[id(passage)] = result
        else:
            per_passage.setdefault(id(passage), []).append(result)

    if tasks and len(failures) > job.max_failure_fraction * len(tasks):
        raise JobAbortedError(
            f"{len(failures)} of {len(tasks)} gradings failed "
            f"(tolerance {job.max_failure_fraction:.0%}); first: {failures[0]}"
        )

    info = _prompt_info(job)
    for record in responses:
        for passage in record.passages:
            if job.mode == "direct":
                if id(passage) in direct_grades:
                    passage.grades.append(direct_grades[id(passage)])
                continue
            results = sorted(per_passage.get(id(passage), []), key=lambda r: r.entry_id)
            correct = sorted(r.entry_id for r in results if r.correct is True)
            wrong = sorted(r.entry_id for r in results if r.correct is False)
            passage.exam_grades.append(
                ExamGrade(
                    correctAnswered=correct,
                    wrongAnswered=wrong,
                    self_ratings=[r.rating for r in results if r.rating is not None],
                    answers=[(r.entry_id, r.answer) for r in results if r.answer is not None],
                    llm=job.backend.identifier,
                    prompt_info=info,
                    exam_ratio=compute_exam_ratio(len(correct), len(wrong)),
                )
            )

    manifest = {
        "mode": job.mode,
        "prompt_class": job.template.prompt_class,
        "llm": job.backend.identifier,
        "budget": job.budget,
        "n_queries": len(responses),
        "n_passages": sum(len(r.passages) for r in responses),
        "n_pairs": len(tasks),
        "n_failures": len(failures),
        "failures": failures,
    }
    return GradingOutcome(responses=responses, manifest=manifest, failures=failures)
