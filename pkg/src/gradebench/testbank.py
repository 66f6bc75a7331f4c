"""Phase 1: create, import, edit, and persist test banks.

A test bank holds the exam questions or nuggets for one query.  Banks can be
seeded automatically (one completion request per query against a generation
prompt that instructs the backend to respond with a fenced JSON block) and
are then refined by hand through :func:`apply_edit`.

Entry IDs are ``<query_id>/<md5 of the entry text>`` so that the ID follows
the text: replacing an entry's text gives it a new identity.
"""

from __future__ import annotations

import gzip
import hashlib
import io
import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .backends import Backend
from .errors import (
    EmptyTestBankError,
    EntryConflictError,
    EntryNotFoundError,
    GenerationParseError,
    TestBankFormatError,
)
from .models import QueryTestBank, TestBankEntry
from .response_file import GZIP_MAGIC

PathLike = Union[str, Path]


def entry_id_for(query_id: str, text: str) -> str:
    """Deterministic entry ID: query ID plus the MD5 of the raw entry text."""
    if not text:
        raise ValueError("entry text must be non-empty")
    digest = hashlib.md5(text.encode("utf-8")).hexdigest()
    return f"{query_id}/{digest}"


# ---------------------------------------------------------------------------
# Generation

_JSON_INSTRUCTION = {
    "questions": (
        "Give the question set in the following JSON format:\n"
        "```json\n{ \"questions\" : [question_text_1, question_text_2, ...] }\n```"
    ),
    "nuggets": (
        "Give the nugget set in the following JSON format:\n"
        "```json\n{ \"nuggets\" : [nugget_text_1, nugget_text_2, ...] }\n```"
    ),
}

_GENERATION_TEMPLATES = {
    ("questions", "dl"): "GenerateQuestions",
    ("nuggets", "dl"): "GenerateNuggets",
    ("questions", "car"): "GenerateQuestionsSubtopic",
    ("nuggets", "car"): "GenerateNuggetsSubtopic",
}

_FENCED_BLOCK = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


def generation_prompt(
    target: str,
    query_text: str = "",
    flavor: str = "dl",
    query_title: str = "",
    query_subtopic: str = "",
) -> str:
    """Render the test-bank generation prompt plus the JSON instruction block."""
    try:
        name = _GENERATION_TEMPLATES[(target, flavor)]
    except KeyError:
        raise ValueError(f"no generation prompt for target={target!r} flavor={flavor!r}")
    template = (resources.files("gradebench") / "templates" / f"{name}.txt").read_text(
        encoding="utf-8"
    )
    return template.format(
        query_text=query_text,
        query_title=query_title,
        query_subtopic=query_subtopic,
        instruction=_JSON_INSTRUCTION[target],
    ).strip()


def parse_generation_completion(completion: str, target: str) -> list[str]:
    """Extract the generated item texts from a completion.

    Takes the first fenced code block; if there is none, tries to parse the
    whole completion as JSON (models often drop the fences).
    """
    match = _FENCED_BLOCK.search(completion)
    raw = match.group(1) if match else completion.strip()
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise GenerationParseError(
            f"completion does not contain a parseable JSON block: {exc.msg}", completion
        ) from exc
    if isinstance(payload, dict):
        items = payload.get(target)
        if items is None:
            # tolerate the other key; some models ignore the naming instruction
            for value in payload.values():
                if isinstance(value, list):
                    items = value
                    break
    else:
        items = payload
    if not isinstance(items, list) or not all(isinstance(item, str) for item in items):
        raise GenerationParseError(
            f"completion JSON does not hold a list of {target}", completion
        )
    return [item.strip() for item in items if item.strip()]


def generate_test_bank(
    query_id: str,
    query_text: str,
    target: str,
    backend: Backend,
    flavor: str = "dl",
    query_title: str = "",
    query_subtopic: str = "",
) -> QueryTestBank:
    """One completion request -> one bank; accepts any item count >= 1."""
    prompt = generation_prompt(
        target,
        query_text=query_text,
        flavor=flavor,
        query_title=query_title or query_text,
        query_subtopic=query_subtopic,
    )
    completion = backend.complete(prompt)
    texts = parse_generation_completion(completion, target)
    if not texts:
        raise EmptyTestBankError(f"backend produced no {target} for query {query_id}")
    kind = "question" if target == "questions" else "nugget"
    items, seen = [], set()
    for text in texts:
        entry_id = entry_id_for(query_id, text)
        if entry_id in seen:
            continue  # models occasionally repeat themselves
        seen.add(entry_id)
        items.append(TestBankEntry(entry_id=entry_id, query_id=query_id, kind=kind, text=text))
    return QueryTestBank(
        query_id=query_id, query_text=query_text, prompt_target=target, items=items
    )


# ---------------------------------------------------------------------------
# Edits (value semantics: the input bank is never mutated)


@dataclass(frozen=True)
class AddEntry:
    text: str
    kind: str
    gold_answers: tuple[str, ...] = ()
    choices: Optional[tuple[str, ...]] = None


@dataclass(frozen=True)
class RemoveEntry:
    entry_id: str


@dataclass(frozen=True)
class ReplaceEntry:
    entry_id: str
    new_text: str


Edit = Union[AddEntry, RemoveEntry, ReplaceEntry]


def apply_edit(bank: QueryTestBank, edit: Edit) -> QueryTestBank:
    items = list(bank.items)
    if isinstance(edit, AddEntry):
        new_id = entry_id_for(bank.query_id, edit.text)
        if any(item.entry_id == new_id for item in items):
            raise EntryConflictError(f"entry {new_id} already exists")
        items.append(
            TestBankEntry(
                entry_id=new_id,
                query_id=bank.query_id,
                kind=edit.kind,
                text=edit.text,
                gold_answers=list(edit.gold_answers),
                choices=list(edit.choices) if edit.choices is not None else None,
            )
        )
    elif isinstance(edit, RemoveEntry):
        remaining = [item for item in items if item.entry_id != edit.entry_id]
        if len(remaining) == len(items):
            raise EntryNotFoundError(f"no entry {edit.entry_id} in bank {bank.query_id}")
        items = remaining
    elif isinstance(edit, ReplaceEntry):
        index = next(
            (i for i, item in enumerate(items) if item.entry_id == edit.entry_id), None
        )
        if index is None:
            raise EntryNotFoundError(f"no entry {edit.entry_id} in bank {bank.query_id}")
        new_id = entry_id_for(bank.query_id, edit.new_text)
        if new_id != edit.entry_id and any(item.entry_id == new_id for item in items):
            raise EntryConflictError(f"replacement text collides with entry {new_id}")
        old = items[index]
        items[index] = old.model_copy(update={"entry_id": new_id, "text": edit.new_text})
    else:
        raise TypeError(f"unknown edit {edit!r}")
    return bank.model_copy(update={"items": items})


# ---------------------------------------------------------------------------
# Persistence (JSON-lines, field names question_id/question_text or
# nugget_id/nugget_text depending on the bank's target)


def _entry_to_wire(entry: TestBankEntry) -> dict:
    prefix = entry.kind
    wire: dict = {
        "query_id": entry.query_id,
        f"{prefix}_id": entry.entry_id,
        f"{prefix}_text": entry.text,
    }
    if entry.gold_answers:
        wire["gold_answers"] = list(entry.gold_answers)
    if entry.choices is not None:
        wire["choices"] = list(entry.choices)
    return wire


def _entry_from_wire(wire: dict, line_no: int) -> TestBankEntry:
    has_question = "question_id" in wire or "question_text" in wire
    has_nugget = "nugget_id" in wire or "nugget_text" in wire
    if has_question and has_nugget:
        raise TestBankFormatError(
            f"line {line_no}: entry mixes question_* and nugget_* fields"
        )
    if not has_question and not has_nugget:
        raise TestBankFormatError(f"line {line_no}: entry has neither question nor nugget fields")
    kind = "question" if has_question else "nugget"
    try:
        return TestBankEntry(
            entry_id=wire[f"{kind}_id"],
            query_id=wire["query_id"],
            kind=kind,
            text=wire[f"{kind}_text"],
            gold_answers=wire.get("gold_answers", []),
            choices=wire.get("choices"),
        )
    except KeyError as exc:
        raise TestBankFormatError(f"line {line_no}: entry lacks field {exc}") from exc


def _withheld(entry_id: str, fraction: float) -> bool:
    if fraction <= 0:
        return False
    bucket = int(hashlib.md5(entry_id.encode("utf-8")).hexdigest(), 16) % 1_000_000
    return bucket / 1_000_000 < fraction


def save_test_bank(
    banks: list[QueryTestBank], path: PathLike, withhold_fraction: float = 0.0
) -> None:
    """Write banks as JSON-lines; gzip when the path ends in .gz.

    withhold_fraction > 0 deterministically drops that share of entries from
    the written file (selected by entry-ID hash), so part of the bank can be
    kept secret while leaderboards and labels are shared.
    """
    lines = []
    for bank in banks:
        items = [
            _entry_to_wire(item)
            for item in bank.items
            if not _withheld(item.entry_id, withhold_fraction)
        ]
        record = {
            "query_id": bank.query_id,
            "query_text": bank.query_text,
            "info": {"prompt_target": bank.prompt_target},
            "items": items,
        }
        lines.append(json.dumps(record, ensure_ascii=False, separators=(",", ":")))
    body = ("".join(line + "\n" for line in lines)).encode("utf-8")
    if str(path).endswith(".gz"):
        buf = io.BytesIO()
        with gzip.GzipFile(fileobj=buf, mode="wb", mtime=0) as zipped:
            zipped.write(body)
        body = buf.getvalue()
    with open(path, "wb") as handle:
        handle.write(body)


def load_test_bank(path: PathLike) -> list[QueryTestBank]:
    with open(path, "rb") as handle:
        blob = handle.read()
    if blob[:2] == GZIP_MAGIC:
        blob = gzip.decompress(blob)
    banks = []
    for line_no, line in enumerate(blob.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TestBankFormatError(f"line {line_no}: malformed JSON: {exc.msg}") from exc
        items = [_entry_from_wire(item, line_no) for item in record.get("items", [])]
        target = (record.get("info") or {}).get("prompt_target")
        if target is None:
            target = "nuggets" if items and items[0].kind == "nugget" else "questions"
        banks.append(
            QueryTestBank(
                query_id=record["query_id"],
                query_text=record.get("query_text", ""),
                prompt_target=target,
                items=items,
            )
        )
    return banks


def banks_by_query(banks: list[QueryTestBank]) -> dict[str, QueryTestBank]:
    return {bank.query_id: bank for bank in banks}
