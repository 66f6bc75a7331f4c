"""Inter-annotator agreement between derived labels and manual judgments.

Four binarization schemes tabulate passage labels (the min_answers-th
largest rating) against manual judgment grades, each with per-row Cohen's
kappa computed one-vs-rest:

* GRADED: one row per label 5..0 against judgment columns 3/2/1/0; the
  positive judgment class per row follows the grade-judgment correspondence
  {5: 3, 4: 3, 3: 2, 2: 2, 1: 2, 0: 0}.
* MERGE: label groups 4+5 vs judgment 3, 1+2+3 vs judgment 2, 0 vs the rest.
* LENIENT: binary, label >= 1 vs judgment >= min_relevant_judgment.
* STRICT: binary, label >= 4 vs judgment >= min_relevant_judgment.

Judgments outside 0..3 are folded into the nearest end column.  A passage's
judgment is the maximum relevance over its judgment records; passages
lacking either a judgment or a matching grade are skipped.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

from ..errors import GradebenchError
from ..models import GradedPassage, QueryResponseSet
from ..response_file import GradeFilter
from .labels import has_matching_grades, passage_label
from .stats import cohen_kappa

SCHEMES = ("GRADED", "MERGE", "LENIENT", "STRICT")

GRADED_JUDGMENT_FOR_LABEL = {5: 3, 4: 3, 3: 2, 2: 2, 1: 2, 0: 0}


@dataclass
class ContingencyRow:
    label: str
    counts: list[int]
    total: int
    kappa: float


@dataclass
class ContingencyTable:
    scheme: str
    min_answers: int
    judgment_columns: list[str]
    rows: list[ContingencyRow] = field(default_factory=list)
    n: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def row(self, label: str) -> ContingencyRow:
        for row in self.rows:
            if row.label == label:
                return row
        raise KeyError(label)


def passage_judgment(passage: GradedPassage) -> Optional[int]:
    relevances = [j.relevance for j in passage.judgments]
    return max(relevances) if relevances else None


def _fold(judgment: int) -> int:
    return max(0, min(3, judgment))


def _one_vs_rest_kappa(pairs, in_labels, in_judgment) -> tuple[int, int, int, int, float]:
    tp = fp = fn = tn = 0
    for label, judgment in pairs:
        label_hit = in_labels(label)
        judgment_hit = in_judgment(judgment)
        if label_hit and judgment_hit:
            tp += 1
        elif label_hit:
            fp += 1
        elif judgment_hit:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn, cohen_kappa(tp, fp, fn, tn)


def label_judgment_pairs(
    responses: list[QueryResponseSet],
    grade_filter: GradeFilter = GradeFilter(),
    min_answers: int = 1,
) -> list[tuple[int, int]]:
    pairs = []
    for record in responses:
        for passage in record.passages:
            judgment = passage_judgment(passage)
            if judgment is None or not has_matching_grades(passage, grade_filter):
                continue
            label = passage_label(
                passage, grade_filter, scheme="max_grade", min_answers=min_answers
            )
            pairs.append((label, judgment))
    return pairs


def agreement_tables(
    responses: list[QueryResponseSet],
    grade_filter: GradeFilter = GradeFilter(),
    min_answers: int = 1,
    min_relevant_judgment: int = 1,
) -> list[ContingencyTable]:
    """Build the GRADED, MERGE, LENIENT, and STRICT tables."""
    pairs = label_judgment_pairs(responses, grade_filter, min_answers)
    if not pairs:
        raise GradebenchError("no passage carries both a manual judgment and a matching grade")
    return tables_from_pairs(pairs, min_answers, min_relevant_judgment)


def tables_from_pairs(
    pairs: list[tuple[int, int]],
    min_answers: int = 1,
    min_relevant_judgment: int = 1,
) -> list[ContingencyTable]:
    n = len(pairs)
    tables = []

    # GRADED: labels 5..0 by judgment value columns 3, 2, 1, 0.
    graded = ContingencyTable(
        scheme="GRADED", min_answers=min_answers, judgment_columns=["3", "2", "1", "0"], n=n
    )
    for label in (5, 4, 3, 2, 1, 0):
        counts = [
            sum(1 for l, j in pairs if l == label and _fold(j) == column)
            for column in (3, 2, 1, 0)
        ]
        positive = GRADED_JUDGMENT_FOR_LABEL[label]
        *_, kappa = _one_vs_rest_kappa(
            pairs, lambda l, L=label: l == L, lambda j, P=positive: _fold(j) == P
        )
        graded.rows.append(
            ContingencyRow(label=str(label), counts=counts, total=sum(counts), kappa=kappa)
        )
    tables.append(graded)

    # MERGE: 4+5 vs judgment 3, 1+2+3 vs judgment 2, 0 vs everything else.
    merge = ContingencyTable(
        scheme="MERGE", min_answers=min_answers, judgment_columns=["3", "2", "<=1"], n=n
    )
    merge_rows = [
        ("4+5", lambda l: l >= 4, lambda j: _fold(j) == 3),
        ("1+2+3", lambda l: 1 <= l <= 3, lambda j: _fold(j) == 2),
        ("0", lambda l: l == 0, lambda j: _fold(j) <= 1),
    ]
    for name, in_labels, in_judgment in merge_rows:
        counts = [
            sum(1 for l, j in pairs if in_labels(l) and _fold(j) == 3),
            sum(1 for l, j in pairs if in_labels(l) and _fold(j) == 2),
            sum(1 for l, j in pairs if in_labels(l) and _fold(j) <= 1),
        ]
        *_, kappa = _one_vs_rest_kappa(pairs, in_labels, in_judgment)
        merge.rows.append(
            ContingencyRow(label=name, counts=counts, total=sum(counts), kappa=kappa)
        )
    tables.append(merge)

    # LENIENT and STRICT: binary label thresholds vs binary judgments.
    for scheme, min_label, top_row, bottom_row in (
        ("LENIENT", 1, "1+2+3+4+5", "0"),
        ("STRICT", 4, "4+5", "0+1+2+3"),
    ):
        table = ContingencyTable(
            scheme=scheme,
            min_answers=min_answers,
            judgment_columns=[f">={min_relevant_judgment}", f"<{min_relevant_judgment}"],
            n=n,
        )
        tp, fp, fn, tn, kappa = _one_vs_rest_kappa(
            pairs,
            lambda l, m=min_label: l >= m,
            lambda j, m=min_relevant_judgment: j >= m,
        )
        table.rows.append(ContingencyRow(label=top_row, counts=[tp, fp], total=tp + fp, kappa=kappa))
        table.rows.append(
            ContingencyRow(label=bottom_row, counts=[fn, tn], total=fn + tn, kappa=kappa)
        )
        tables.append(table)
    return tables


def render_tables_text(tables: list[ContingencyTable], min_relevant_judgment: int) -> str:
    """Plain-text rendering of the agreement tables, one block per scheme."""
    lines = []
    for table in tables:
        lines.append(
            f"== {table.scheme} (min answers = {table.min_answers}, "
            f"min relevant judgment = {min_relevant_judgment}, n = {table.n}) =="
        )
        header = ["label"] + [f"judgment {c}" for c in table.judgment_columns]
        header += ["total", "kappa"]
        lines.append("\t".join(header))
        for row in table.rows:
            cells = [row.label] + [str(c) for c in row.counts]
            cells += [str(row.total), f"{row.kappa:.4f}"]
            lines.append("\t".join(cells))
        lines.append("")
    return "\n".join(lines)
