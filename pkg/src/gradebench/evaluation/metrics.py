"""Ranking metrics, coverage scores, and leaderboard assembly.

Rubric coverage is recall-flavored: the fraction of test-bank entries rated
at or above a threshold by some passage within a method's top-k.  Ranking
metrics (reciprocal rank, precision@k) consume the rankings embedded in the
response records plus derived relevance labels.  Per-query scores aggregate
into a leaderboard with standard errors and, when a reference ordering is
supplied, rank correlations against it.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from ..errors import CorrelationError, GradebenchError, UnknownMethodError
from ..models import QueryResponseSet, QueryTestBank, RankingEntry
from ..response_file import GradeFilter
from .labels import entry_ratings, passage_label
from .stats import kendall_tau, spearman

PathLike = Union[str, Path]


def mrr(ranking: list[RankingEntry], relevant: set[str]) -> float:
    """Reciprocal rank of the first relevant passage; 0 when none retrieved."""
    for entry in sorted(ranking, key=lambda e: e.rank):
        if entry.paragraph_id in relevant:
            return 1.0 / entry.rank
    return 0.0


def precision_at_k(ranking: list[RankingEntry], relevant: set[str], k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    top = sorted(ranking, key=lambda e: e.rank)[:k]
    return sum(1 for entry in top if entry.paragraph_id in relevant) / k


def mean_and_std_error(values: list[float]) -> tuple[float, float]:
    """Arithmetic mean and stderr using the sample (n-1) standard deviation."""
    if not values:
        raise GradebenchError("no per-query values to aggregate")
    if len(values) == 1:
        return values[0], 0.0
    return statistics.mean(values), statistics.stdev(values) / math.sqrt(len(values))


def ranking_methods(responses: list[QueryResponseSet]) -> list[str]:
    methods = {r.method for record in responses for p in record.passages for r in p.rankings}
    return sorted(methods)


def _method_rankings(
    record: QueryResponseSet, method: str
) -> list[tuple[int, str]]:
    pairs = [
        (r.rank, passage.paragraph_id)
        for passage in record.passages
        for r in passage.rankings
        if r.method == method
    ]
    return sorted(pairs)


def cover_per_query(
    responses: list[QueryResponseSet],
    banks: dict[str, QueryTestBank],
    method: str,
    k: int = 20,
    min_rating: int = 4,
    grade_filter: GradeFilter = GradeFilter(),
) -> dict[str, float]:
    """Per-query fraction of bank entries covered within the method's top k."""
    coverage: dict[str, float] = {}
    for record in responses:
        bank = banks.get(record.query_id)
        if bank is None or not bank.items:
            continue
        in_cutoff = {
            pid for rank, pid in _method_rankings(record, method) if rank <= k
        }
        covered: set[str] = set()
        for passage in record.passages:
            if passage.paragraph_id not in in_cutoff:
                continue
            for entry_id, rating in entry_ratings(passage, grade_filter).items():
                if rating >= min_rating and bank.has_entry(entry_id):
                    covered.add(entry_id)
        coverage[record.query_id] = len(covered) / len(bank.items)
    return coverage


def rubric_cover(
    responses: list[QueryResponseSet],
    banks: dict[str, QueryTestBank],
    method: str,
    k: int = 20,
    min_rating: int = 4,
    grade_filter: GradeFilter = GradeFilter(),
) -> tuple[float, float]:
    """Mean coverage over queries with its standard error."""
    if method not in ranking_methods(responses):
        raise UnknownMethodError(f"method {method!r} appears in no ranking")
    coverage = cover_per_query(responses, banks, method, k, min_rating, grade_filter)
    if not coverage:
        raise GradebenchError("no query has both a test bank and responses")
    return mean_and_std_error([coverage[qid] for qid in sorted(coverage)])


def answerable_per_query(
    responses: list[QueryResponseSet],
    banks: dict[str, QueryTestBank],
    min_rating: int = 4,
    grade_filter: GradeFilter = GradeFilter(),
) -> dict[str, float]:
    """Fraction of entries rated >= min_rating by any passage of any system."""
    answerable: dict[str, float] = {}
    for record in responses:
        bank = banks.get(record.query_id)
        if bank is None or not bank.items:
            continue
        hit: set[str] = set()
        for passage in record.passages:
            for entry_id, rating in entry_ratings(passage, grade_filter).items():
                if rating >= min_rating and bank.has_entry(entry_id):
                    hit.add(entry_id)
        answerable[record.query_id] = len(hit) / len(bank.items)
    return answerable


def nexam_normalize(
    cover_by_query: dict[str, float], answerable_by_query: dict[str, float]
) -> tuple[dict[str, float], list[str]]:
    """Normalize coverage by per-query answerable fraction, capped at 1.

    Queries where nothing is answerable cannot be normalized; they are
    excluded from the result and reported in the second return value.
    """
    normalized: dict[str, float] = {}
    excluded: list[str] = []
    for query_id, cover in cover_by_query.items():
        answerable = answerable_by_query.get(query_id, 0.0)
        if answerable == 0:
            excluded.append(query_id)
            continue
        normalized[query_id] = min(cover / answerable, 1.0)
    return normalized, sorted(excluded)


# ---------------------------------------------------------------------------
# Leaderboards


@dataclass
class LeaderboardRow:
    method: str
    score: float
    std_error: float


@dataclass
class Leaderboard:
    metric_name: str
    rows: list[LeaderboardRow] = field(default_factory=list)
    spearman: Optional[float] = None
    kendall: Optional[float] = None
    excluded_queries: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "metric_name": self.metric_name,
            "rows": [
                {"method": r.method, "score": r.score, "std_error": r.std_error}
                for r in self.rows
            ],
            "spearman": self.spearman,
            "kendall": self.kendall,
            "excluded_queries": self.excluded_queries,
        }


def build_leaderboard(
    scores_by_method: dict[str, list[float]],
    metric_name: str = "score",
    reference_ranks: Optional[dict[str, float]] = None,
) -> Leaderboard:
    """Aggregate per-query scores into sorted rows with rank correlations.

    reference_ranks maps method name to its official rank (top rank = 1);
    methods missing from the reference stay on the board but are left out of
    the correlation.
    """
    if not scores_by_method:
        raise GradebenchError("no method scores supplied")
    rows = []
    for method in sorted(scores_by_method):
        score, std_error = mean_and_std_error(scores_by_method[method])
        rows.append(LeaderboardRow(method=method, score=score, std_error=std_error))
    rows.sort(key=lambda row: (-row.score, row.method))
    board = Leaderboard(metric_name=metric_name, rows=rows)

    if reference_ranks is not None:
        common = [row.method for row in rows if row.method in reference_ranks]
        if len(common) >= 2:
            ours = [-score for score in (next(r.score for r in rows if r.method == m) for m in common)]
            reference = [reference_ranks[m] for m in common]
            try:
                board.spearman = spearman(ours, reference)
                board.kendall = kendall_tau(ours, reference)
            except CorrelationError:
                pass  # all-tied scores: correlation undefined, leave unset
    return board


def load_reference_ranks(path: PathLike) -> dict[str, float]:
    """Reference leaderboard: a JSON dictionary method -> official rank."""
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise GradebenchError("reference leaderboard must be a JSON dictionary")
    return {str(method): float(rank) for method, rank in data.items()}


def qrels_leaderboard_scores(
    responses: list[QueryResponseSet],
    grade_filter: GradeFilter = GradeFilter(),
    metric: str = "mrr",
    min_rating: int = 4,
    min_answers: int = 1,
    k: int = 20,
) -> dict[str, list[float]]:
    """Per-query ranking scores per method, with relevance derived from grades."""
    relevant_by_query: dict[str, set[str]] = {}
    for record in responses:
        relevant_by_query[record.query_id] = {
            passage.paragraph_id
            for passage in record.passages
            if passage_label(passage, grade_filter, "max_grade", min_rating, min_answers)
            >= min_rating
        }
    scores: dict[str, list[float]] = {}
    for method in ranking_methods(responses):
        per_query = []
        for record in responses:
            ranking = [
                r
                for passage in record.passages
                for r in passage.rankings
                if r.method == method
            ]
            relevant = relevant_by_query[record.query_id]
            if metric == "mrr":
                per_query.append(mrr(ranking, relevant))
            elif metric == "precision":
                per_query.append(precision_at_k(ranking, relevant, k))
            else:
                raise GradebenchError(f"unknown leaderboard metric {metric!r}")
        scores[method] = per_query
    return scores


def cover_leaderboard_scores(
    responses: list[QueryResponseSet],
    banks: dict[str, QueryTestBank],
    k: int = 20,
    min_rating: int = 4,
    grade_filter: GradeFilter = GradeFilter(),
    normalize: bool = False,
) -> tuple[dict[str, list[float]], list[str]]:
    """Per-query coverage per method; optionally normalized by answerability."""
    answerable = (
        answerable_per_query(responses, banks, min_rating, grade_filter) if normalize else {}
    )
    scores: dict[str, list[float]] = {}
    excluded_all: set[str] = set()
    for method in ranking_methods(responses):
        coverage = cover_per_query(responses, banks, method, k, min_rating, grade_filter)
        if normalize:
            coverage, excluded = nexam_normalize(coverage, answerable)
            excluded_all.update(excluded)
        scores[method] = [coverage[qid] for qid in sorted(coverage)]
    return scores, sorted(excluded_all)


def render_leaderboard_tsv(board: Leaderboard) -> str:
    """TSV rows 'method<TAB>score<TAB>std_error' plus correlation footer rows."""
    lines = [f"{row.method}\t{row.score:.6f}\t{row.std_error:.6f}" for row in board.rows]
    if board.spearman is not None:
        lines.append(f"spearman\t{board.spearman:.6f}\t")
    if board.kendall is not None:
        lines.append(f"kendall\t{board.kendall:.6f}\t")
    return "".join(line + "\n" for line in lines)


def write_leaderboard_tsv(board: Leaderboard, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(render_leaderboard_tsv(board))
