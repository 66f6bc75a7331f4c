"""Reading and writing the JSON-lines response interchange files.

Files may be plain text or gzip-compressed; readers sniff the gzip magic
bytes instead of trusting the filename.  Writers are deterministic: stable
key order, compact separators, and a zeroed gzip timestamp so identical
records always produce byte-identical files.
"""

from __future__ import annotations

import gzip
import io
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

from pydantic import ValidationError

from .errors import ResponseFormatError
from .models import ExamGrade, GradedPassage, QueryResponseSet

GZIP_MAGIC = b"\x1f\x8b"

PathLike = Union[str, Path]


def _open_maybe_gzip(path: PathLike) -> io.TextIOBase:
    raw = open(path, "rb")
    magic = raw.read(2)
    raw.seek(0)
    if magic == GZIP_MAGIC:
        return io.TextIOWrapper(gzip.GzipFile(fileobj=raw, mode="rb"), encoding="utf-8")
    return io.TextIOWrapper(raw, encoding="utf-8")


def _missing_field_message(exc: ValidationError, payload) -> str:
    paragraph_id = "?"
    try:
        if isinstance(payload, list) and len(payload) == 2 and isinstance(payload[1], list):
            for passage in payload[1]:
                if isinstance(passage, dict) and "paragraph_id" in passage:
                    paragraph_id = passage["paragraph_id"]
                    break
    except Exception:
        pass
    first = exc.errors()[0]
    field = ".".join(str(piece) for piece in first["loc"])
    if first["type"] == "missing":
        return f"missing required field {field!r} (paragraph_id={paragraph_id})"
    return f"invalid field {field!r}: {first['msg']} (paragraph_id={paragraph_id})"


def read_response_file(path: PathLike) -> list[QueryResponseSet]:
    """Read one QueryResponseSet per line, in file order.

    Raises ResponseFormatError with line number and byte offset for malformed
    lines, and with the offending field name and paragraph_id for records that
    fail validation.
    """
    records: list[QueryResponseSet] = []
    offset = 0
    with _open_maybe_gzip(path) as handle:
        for line_no, line in enumerate(handle, start=1):
            stripped = line.strip()
            if stripped:
                try:
                    payload = json.loads(stripped)
                except json.JSONDecodeError as exc:
                    raise ResponseFormatError(f"malformed JSON: {exc.msg}", line_no, offset) from exc
                if not (isinstance(payload, list) and len(payload) == 2):
                    raise ResponseFormatError(
                        "expected a two-element array [query_id, [passages]]", line_no, offset
                    )
                query_id, passages = payload
                try:
                    records.append(QueryResponseSet(query_id=str(query_id), passages=passages))
                except ValidationError as exc:
                    raise ResponseFormatError(
                        _missing_field_message(exc, payload), line_no, offset
                    ) from exc
            offset += len(line.encode("utf-8"))
    return records


def record_to_line(record: QueryResponseSet) -> str:
    payload = [record.query_id, [p.model_dump(by_alias=True) for p in record.passages]]
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))


def write_response_file(
    records: Iterable[QueryResponseSet], path: PathLike, compress: bool = True
) -> None:
    """Write one record per line; gzip with a zeroed mtime when compress is set."""
    body = "".join(record_to_line(record) + "\n" for record in records).encode("utf-8")
    if compress:
        buf = io.BytesIO()
        with gzip.GzipFile(fileobj=buf, mode="wb", mtime=0) as zipped:
            zipped.write(body)
        body = buf.getvalue()
    with open(path, "wb") as handle:
        handle.write(body)


def write_response_file_atomic(
    records: Iterable[QueryResponseSet], path: PathLike, compress: bool = True
) -> None:
    """Write via a temp file and rename, so readers never see a partial file."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    write_response_file(records, tmp, compress=compress)
    os.replace(tmp, path)


@dataclass(frozen=True)
class GradeFilter:
    """Selects grades by backend identifier, prompt class, or self-rated flag.

    Unset fields match everything; the empty filter selects all grades.
    """

    llm: Optional[str] = None
    prompt_class: Optional[str] = None
    is_self_rated: Optional[bool] = None

    def matches(self, grade) -> bool:
        if self.llm is not None and grade.llm != self.llm:
            return False
        if self.prompt_class is not None and grade.prompt_info.prompt_class != self.prompt_class:
            return False
        if self.is_self_rated is not None and grade.prompt_info.is_self_rated != self.is_self_rated:
            return False
        return True


def select_grades(passage: GradedPassage, grade_filter: GradeFilter = GradeFilter()) -> list[ExamGrade]:
    """Exam grades matching all supplied filter fields, in stored order."""
    return [grade for grade in passage.exam_grades if grade_filter.matches(grade)]


def select_direct_grades(passage: GradedPassage, grade_filter: GradeFilter = GradeFilter()):
    return [grade for grade in passage.grades if grade_filter.matches(grade)]


def unresolved_entry_ids(record: QueryResponseSet, bank) -> set[str]:
    """Entry IDs referenced by the record's grades but absent from the bank.

    Empty when every self-rating and verdict resolves to the query's test
    bank; useful when validating files produced elsewhere.
    """
    known = {entry.entry_id for entry in bank.items}
    seen: set[str] = set()
    for passage in record.passages:
        for grade in passage.exam_grades:
            seen.update(rating.entry_id for rating in grade.self_ratings)
            seen.update(grade.correct_answered)
            seen.update(grade.wrong_answered)
            seen.update(entry_id for entry_id, _ in grade.answers)
    return seen - known


def load_queries(path: PathLike) -> dict[str, str]:
    """Queries file: a JSON dictionary mapping query ID to query text."""
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise ResponseFormatError("queries file must be a JSON dictionary", 1, 0)
    return {str(k): str(v) for k, v in data.items()}


def save_queries(queries: dict[str, str], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(queries, handle, ensure_ascii=False, indent=2, sort_keys=True)
        handle.write("\n")
