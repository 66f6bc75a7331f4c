"""Phase 3: the four human-oversight reports over graded responses.

* verify grading: extracted answers and their grades, entry by entry, so a
  reviewer can spot a grader that rates badly;
* grid display: a passages-by-entries matrix of ratings with answers;
* uncovered passages: manually judged-relevant passages no entry rates
  highly (the bank is missing something);
* spurious entries: entries frequently rated high on passages judged
  non-relevant (the bank has a false-positive generator).

All reports are pure functions of their inputs and render byte-stable text.
A passage with no judgments is excluded from the uncovered and spurious
reports: unjudged is not the same as judged non-relevant.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

from .models import QueryResponseSet, QueryTestBank
from .response_file import GradeFilter, select_grades
from .evaluation.labels import entry_ratings


def _entry_answers(passage, grade_filter: GradeFilter) -> dict[str, str]:
    """Best answer text per entry; prefers the longest (extraction over digits)."""
    answers: dict[str, str] = {}
    for grade in select_grades(passage, grade_filter):
        for entry_id, text in grade.answers:
            if entry_id not in answers or len(text) > len(answers[entry_id]):
                answers[entry_id] = text
    return answers


def _entry_texts(banks: list[QueryTestBank]) -> dict[str, str]:
    return {entry.entry_id: entry.text for bank in banks for entry in bank.items}


def _judged_relevances(passage) -> list[int]:
    return [j.relevance for j in passage.judgments]


# ---------------------------------------------------------------------------
# Verify grading


@dataclass
class VerifyGradingRow:
    rating: Optional[int]
    answer: str
    paragraph_id: str


@dataclass
class VerifyGradingGroup:
    entry_id: str
    entry_text: str
    rows: list[VerifyGradingRow] = field(default_factory=list)


@dataclass
class VerifyGradingReport:
    groups: list[VerifyGradingGroup] = field(default_factory=list)
    warning: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)


def report_verify_grading(
    responses: list[QueryResponseSet],
    banks: list[QueryTestBank],
    grade_filter: GradeFilter = GradeFilter(),
) -> VerifyGradingReport:
    """Answers and grades grouped per entry, best-rated first."""
    texts = _entry_texts(banks)
    by_entry: dict[str, list[VerifyGradingRow]] = {}
    for record in responses:
        for passage in record.passages:
            ratings = entry_ratings(passage, grade_filter)
            answers = _entry_answers(passage, grade_filter)
            for entry_id in sorted(set(ratings) | set(answers)):
                by_entry.setdefault(entry_id, []).append(
                    VerifyGradingRow(
                        rating=ratings.get(entry_id),
                        answer=answers.get(entry_id, ""),
                        paragraph_id=passage.paragraph_id,
                    )
                )
    groups = []
    for entry_id in sorted(by_entry):
        rows = sorted(
            by_entry[entry_id],
            key=lambda row: (-(row.rating if row.rating is not None else -1), row.paragraph_id),
        )
        groups.append(
            VerifyGradingGroup(entry_id=entry_id, entry_text=texts.get(entry_id, ""), rows=rows)
        )
    warning = None if groups else "no grades matched the filter"
    return VerifyGradingReport(groups=groups, warning=warning)


def render_verify_grading_text(report: VerifyGradingReport) -> str:
    lines = []
    if report.warning:
        lines.append(f"WARNING: {report.warning}")
    for group in report.groups:
        lines.append(f"{group.entry_id}: {group.entry_text}")
        for row in group.rows:
            rating = "-" if row.rating is None else str(row.rating)
            lines.append(f"  (rating: {rating})  {row.answer}  [{row.paragraph_id}]")
        lines.append("")
    return "\n".join(lines) + ("\n" if lines and lines[-1] != "" else "")


# ---------------------------------------------------------------------------
# Grid display


@dataclass
class GridCell:
    rating: int
    answer: str = ""


@dataclass
class GridRow:
    paragraph_id: str
    best_rank: Optional[int]
    cells: list[Optional[GridCell]] = field(default_factory=list)


@dataclass
class GridReport:
    query_id: str
    entry_ids: list[str] = field(default_factory=list)
    entry_texts: list[str] = field(default_factory=list)
    rows: list[GridRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def report_grid(
    responses: list[QueryResponseSet],
    banks: list[QueryTestBank],
    grade_filter: GradeFilter = GradeFilter(),
) -> list[GridReport]:
    """Per query: passages (rows, by best rank) x entries (columns) ratings.

    A cell is None when the entry was never graded for that passage; missing
    is rendered distinctly from rating 0.
    """
    banks_by_query = {bank.query_id: bank for bank in banks}
    reports = []
    for record in responses:
        bank = banks_by_query.get(record.query_id)
        entries = bank.items if bank is not None else []
        grid = GridReport(
            query_id=record.query_id,
            entry_ids=[e.entry_id for e in entries],
            entry_texts=[e.text for e in entries],
        )

        def sort_key(passage):
            ranks = [r.rank for r in passage.rankings]
            return (min(ranks) if ranks else float("inf"), passage.paragraph_id)

        for passage in sorted(record.passages, key=sort_key):
            ratings = entry_ratings(passage, grade_filter)
            answers = _entry_answers(passage, grade_filter)
            ranks = [r.rank for r in passage.rankings]
            cells: list[Optional[GridCell]] = []
            for entry in entries:
                if entry.entry_id in ratings:
                    cells.append(
                        GridCell(
                            rating=ratings[entry.entry_id],
                            answer=answers.get(entry.entry_id, ""),
                        )
                    )
                else:
                    cells.append(None)
            grid.rows.append(
                GridRow(
                    paragraph_id=passage.paragraph_id,
                    best_rank=min(ranks) if ranks else None,
                    cells=cells,
                )
            )
        reports.append(grid)
    return reports


def render_grid_text(reports: list[GridReport]) -> str:
    lines = []
    for grid in reports:
        lines.append(f"query {grid.query_id}")
        header = ["passage"] + [f"e{i + 1}" for i in range(len(grid.entry_ids))]
        lines.append("\t".join(header))
        for row in grid.rows:
            cells = ["-" if cell is None else str(cell.rating) for cell in row.cells]
            lines.append("\t".join([row.paragraph_id] + cells))
        for i, (entry_id, text) in enumerate(zip(grid.entry_ids, grid.entry_texts)):
            lines.append(f"  e{i + 1} = {entry_id}: {text}")
        lines.append("")
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Uncovered passages / spurious entries


@dataclass
class UncoveredPassage:
    query_id: str
    paragraph_id: str
    text: str
    judgment: int
    best_rating: Optional[int]

    def to_dict(self) -> dict:
        return asdict(self)


def report_uncovered(
    responses: list[QueryResponseSet],
    banks: list[QueryTestBank],
    min_judgment: int = 1,
    min_rating: int = 4,
    grade_filter: GradeFilter = GradeFilter(),
) -> list[UncoveredPassage]:
    """Judged-relevant passages whose best rating stays below min_rating."""
    uncovered = []
    for record in responses:
        for passage in record.passages:
            relevances = _judged_relevances(passage)
            if not relevances or max(relevances) < min_judgment:
                continue
            ratings = entry_ratings(passage, grade_filter)
            best = max(ratings.values()) if ratings else None
            if best is None or best < min_rating:
                uncovered.append(
                    UncoveredPassage(
                        query_id=record.query_id,
                        paragraph_id=passage.paragraph_id,
                        text=passage.text,
                        judgment=max(relevances),
                        best_rating=best,
                    )
                )
    uncovered.sort(key=lambda u: (u.query_id, u.paragraph_id))
    return uncovered


def render_uncovered_text(report: list[UncoveredPassage]) -> str:
    lines = []
    for item in report:
        best = "-" if item.best_rating is None else str(item.best_rating)
        lines.append(
            f"query {item.query_id}  passage {item.paragraph_id}  "
            f"judgment {item.judgment}  best rating {best}"
        )
        lines.append(f"  {item.text}")
        lines.append("")
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass
class SpuriousEntry:
    entry_id: str
    text: str
    frequency: int

    def to_dict(self) -> dict:
        return asdict(self)


def report_spurious(
    responses: list[QueryResponseSet],
    banks: list[QueryTestBank],
    max_judgment: int = 0,
    min_rating: int = 4,
    grade_filter: GradeFilter = GradeFilter(),
) -> list[SpuriousEntry]:
    """Entries often rated >= min_rating on passages judged non-relevant.

    Frequency counts passages whose judgments all sit at or below
    max_judgment; entries never spuriously matched are omitted.
    """
    texts = _entry_texts(banks)
    frequency: dict[str, int] = {}
    for record in responses:
        for passage in record.passages:
            relevances = _judged_relevances(passage)
            if not relevances or max(relevances) > max_judgment:
                continue
            for entry_id, rating in entry_ratings(passage, grade_filter).items():
                if rating >= min_rating:
                    frequency[entry_id] = frequency.get(entry_id, 0) + 1
    report = [
        SpuriousEntry(entry_id=entry_id, text=texts.get(entry_id, ""), frequency=count)
        for entry_id, count in frequency.items()
    ]
    report.sort(key=lambda s: (-s.frequency, s.entry_id))
    return report


def render_spurious_text(report: list[SpuriousEntry]) -> str:
    return "".join(f"({item.frequency})    {item.text or item.entry_id}\n" for item in report)
