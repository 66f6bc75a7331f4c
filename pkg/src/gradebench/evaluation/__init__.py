"""Phase 4: labels, qrels export, coverage, correlations, agreement tables."""

from .agreement import (
    ContingencyRow,
    ContingencyTable,
    agreement_tables,
    label_judgment_pairs,
    render_tables_text,
    tables_from_pairs,
)
from .labels import (
    derive_labels,
    entry_ratings,
    export_qrels,
    has_matching_grades,
    passage_label,
    qrels_file_name,
    rating_values,
)
from .metrics import (
    Leaderboard,
    LeaderboardRow,
    answerable_per_query,
    build_leaderboard,
    cover_leaderboard_scores,
    cover_per_query,
    load_reference_ranks,
    mean_and_std_error,
    mrr,
    nexam_normalize,
    precision_at_k,
    qrels_leaderboard_scores,
    ranking_methods,
    render_leaderboard_tsv,
    rubric_cover,
    write_leaderboard_tsv,
)
from .stats import cohen_kappa, fractional_ranks, kendall_tau, spearman
from .trec import parse_qrels, parse_run_file, write_qrels

__all__ = [
    "ContingencyRow",
    "ContingencyTable",
    "Leaderboard",
    "LeaderboardRow",
    "agreement_tables",
    "answerable_per_query",
    "build_leaderboard",
    "cohen_kappa",
    "cover_leaderboard_scores",
    "cover_per_query",
    "derive_labels",
    "entry_ratings",
    "export_qrels",
    "fractional_ranks",
    "has_matching_grades",
    "kendall_tau",
    "label_judgment_pairs",
    "load_reference_ranks",
    "mean_and_std_error",
    "mrr",
    "nexam_normalize",
    "parse_qrels",
    "parse_run_file",
    "passage_label",
    "precision_at_k",
    "qrels_file_name",
    "qrels_leaderboard_scores",
    "ranking_methods",
    "rating_values",
    "render_leaderboard_tsv",
    "render_tables_text",
    "rubric_cover",
    "spearman",
    "tables_from_pairs",
    "write_leaderboard_tsv",
    "write_qrels",
]
