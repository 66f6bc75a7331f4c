"""TREC interchange formats: 6-column run files and 4-column qrels.

Parsers are strict and report the offending line number; the qrels writer is
deterministic (sorted by query then passage) so exports can be diffed.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Union

from ..errors import TrecFormatError
from ..models import Judgment, RankingEntry
from ..response_file import _open_maybe_gzip

PathLike = Union[str, Path]


def parse_run_file(path: PathLike) -> list[RankingEntry]:
    """Parse 'qid Q0 docid rank score tag' lines; ranks unique per (tag, qid)."""
    entries: list[RankingEntry] = []
    seen_ranks: set[tuple[str, str, int]] = set()
    with _open_maybe_gzip(path) as handle:
        for line_no, line in enumerate(handle, start=1):
            parts = line.split()
            if not parts:
                raise TrecFormatError("empty line", line_no)
            if len(parts) != 6:
                raise TrecFormatError(f"expected 6 columns, found {len(parts)}", line_no)
            qid, q0, docid, rank_text, score_text, tag = parts
            if q0.upper() != "Q0":
                raise TrecFormatError(f"second column must be Q0, found {q0!r}", line_no)
            try:
                rank = int(rank_text)
            except ValueError:
                raise TrecFormatError(f"rank {rank_text!r} is not an integer", line_no) from None
            if rank < 1:
                raise TrecFormatError(f"rank must be >= 1, found {rank}", line_no)
            try:
                score = float(score_text)
            except ValueError:
                raise TrecFormatError(f"score {score_text!r} is not a number", line_no) from None
            key = (tag, qid, rank)
            if key in seen_ranks:
                raise TrecFormatError(f"duplicate rank {rank} for ({tag}, {qid})", line_no)
            seen_ranks.add(key)
            entries.append(
                RankingEntry(method=tag, paragraphId=docid, queryId=qid, rank=rank, score=score)
            )
    return entries


def parse_qrels(path: PathLike) -> list[Judgment]:
    """Parse 'qid 0 docid relevance' lines; relevance may be negative."""
    judgments: list[Judgment] = []
    with _open_maybe_gzip(path) as handle:
        for line_no, line in enumerate(handle, start=1):
            parts = line.split()
            if not parts:
                raise TrecFormatError("empty line", line_no)
            if len(parts) != 4:
                raise TrecFormatError(f"expected 4 columns, found {len(parts)}", line_no)
            qid, _iteration, docid, relevance_text = parts
            try:
                relevance = int(relevance_text)
            except ValueError:
                raise TrecFormatError(
                    f"relevance {relevance_text!r} is not an integer", line_no
                ) from None
            judgments.append(
                Judgment(paragraphId=docid, query=qid, relevance=relevance, titleQuery=qid)
            )
    return judgments


def write_qrels(labels: Iterable[tuple[str, str, int]], path: PathLike) -> None:
    """Write (query_id, paragraph_id, label) triples in trec_eval qrels format."""
    rows = sorted(labels, key=lambda row: (row[0], row[1]))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for qid, docid, label in rows:
            handle.write(f"{qid} 0 {docid} {label}\n")
