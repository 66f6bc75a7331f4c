"""JSON-over-HTTP service powering the human-in-the-loop verification UI.

The service owns a workspace directory (queries, test bank, graded
responses).  Reads recompute reports and leaderboards from the files on every
request; writes (test-bank edits, regrade results) go through a single lock
and land atomically via write-temp-then-rename, so a crash never leaves a
corrupt workspace.

Regrading replaces the grades matching the chosen backend and prompt class:
stale grades (for example, for a deleted test-bank entry) are stripped before
the fresh grading pass appends its records.  One regrade job runs at a time;
clients poll ``/api/jobs/{id}``.  Each finished job carries the leaderboard
before and after plus a server-computed diff, so the UI never does math.
"""

from __future__ import annotations

import os
import threading
from pathlib import Path
from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import evaluation as ev
from .backends import BackendConfig, MockBackend, RemoteBackend
from .errors import GradebenchError
from .grading import GradingJob, grade_job
from .models import QueryTestBank, TestBankEntry
from .prompts import default_template_for, load_template
from .response_file import (
    GradeFilter,
    load_queries,
    read_response_file,
    write_response_file_atomic,
)
from .testbank import AddEntry, RemoveEntry, ReplaceEntry, apply_edit, load_test_bank, save_test_bank
from .verification import report_grid, report_spurious, report_uncovered, report_verify_grading


class AddEntryBody(BaseModel):
    text: str = Field(min_length=1)
    kind: Literal["question", "nugget"]
    gold_answers: list[str] = Field(default_factory=list)


class ReplaceEntryBody(BaseModel):
    new_text: str = Field(min_length=1)


class RegradeBody(BaseModel):
    backend: Literal["mock", "remote"] = "mock"
    mode: Literal["self-rated", "extract-verify", "extract"] = "self-rated"
    prompt_class: Optional[str] = None
    metric: Literal["cover", "mrr"] = "cover"
    k: int = 20
    min_rating: int = 4


def _backend_for(body: RegradeBody):
    if body.backend == "mock":
        return MockBackend()
    # remote configuration comes from the environment; the key stays in its
    # own variable and is never accepted over HTTP
    endpoint = os.environ.get("GRADEBENCH_ENDPOINT", "")
    model = os.environ.get("GRADEBENCH_MODEL", "")
    if not endpoint or not model:
        raise GradebenchError(
            "remote regrades need GRADEBENCH_ENDPOINT and GRADEBENCH_MODEL set"
        )
    return RemoteBackend(BackendConfig(endpoint_url=endpoint, model_name=model))


class _Workspace:
    def __init__(self, root: str, queries_name: str, testbank_name: str, responses_name: str):
        self.root = Path(root)
        self.queries_path = self.root / queries_name
        self.testbank_path = self.root / testbank_name
        self.responses_path = self.root / responses_name
        for path in (self.queries_path, self.testbank_path, self.responses_path):
            if not path.exists():
                raise GradebenchError(f"workspace is missing {path.name} ({path})")
        self.write_lock = threading.Lock()

    def queries(self) -> dict[str, str]:
        return load_queries(self.queries_path)

    def banks(self) -> list[QueryTestBank]:
        return load_test_bank(self.testbank_path)

    def responses(self):
        return read_response_file(self.responses_path)

    def save_banks_atomic(self, banks: list[QueryTestBank]) -> None:
        tmp = self.testbank_path.with_name(self.testbank_path.name + ".tmp")
        save_test_bank(banks, tmp)
        os.replace(tmp, self.testbank_path)


def _banks_from_grades(responses) -> dict[str, QueryTestBank]:
    """Reconstruct the entry universe recorded in the grades themselves.

    Used for a job's before/after boards so that "before" reflects the old
    grading pass even when the test bank has been edited in between.
    """
    from .evaluation.labels import entry_ratings

    banks = {}
    for record in responses:
        entry_ids = sorted(
            {eid for passage in record.passages for eid in entry_ratings(passage)}
        )
        if entry_ids:
            banks[record.query_id] = QueryTestBank(
                query_id=record.query_id,
                query_text="",
                prompt_target="questions",
                items=[
                    TestBankEntry(
                        entry_id=eid, query_id=record.query_id, kind="question", text=eid
                    )
                    for eid in entry_ids
                ],
            )
    return banks


def _leaderboard(
    workspace: _Workspace,
    body: RegradeBody,
    grade_filter: GradeFilter,
    universe: str = "bank",
) -> dict:
    responses = workspace.responses()
    if body.metric == "mrr":
        scores = ev.qrels_leaderboard_scores(
            responses, grade_filter, metric="mrr", min_rating=body.min_rating
        )
        board = ev.build_leaderboard(scores, metric_name="MRR")
    else:
        if universe == "grades":
            banks = _banks_from_grades(responses)
        else:
            banks = {bank.query_id: bank for bank in workspace.banks()}
        scores, excluded = ev.cover_leaderboard_scores(
            responses, banks, k=body.k, min_rating=body.min_rating, grade_filter=grade_filter
        )
        board = ev.build_leaderboard(scores, metric_name=f"Cover@{body.k}")
        board.excluded_queries = excluded
    return board.to_dict()


def _board_diff(before: dict, after: dict) -> list[dict]:
    before_by_method = {row["method"]: row["score"] for row in before["rows"]}
    after_by_method = {row["method"]: row["score"] for row in after["rows"]}
    diff = []
    for method in sorted(set(before_by_method) | set(after_by_method)):
        b = before_by_method.get(method)
        a = after_by_method.get(method)
        diff.append(
            {
                "method": method,
                "before": b,
                "after": a,
                "delta": (a - b) if (a is not None and b is not None) else None,
            }
        )
    return diff


def create_app(
    workspace: str,
    queries_name: str = "queries.json",
    testbank_name: str = "testbank.jsonl.gz",
    responses_name: str = "responses.jsonl.gz",
    ui_dir: Optional[str] = None,
) -> FastAPI:
    ws = _Workspace(workspace, queries_name, testbank_name, responses_name)
    app = FastAPI(title="gradebench verification service")

    jobs: dict[str, dict] = {}
    job_counter = threading.Lock()
    job_state = {"next_id": 1, "active": None}

    def grade_filter(prompt_class: Optional[str] = None, llm: Optional[str] = None) -> GradeFilter:
        return GradeFilter(llm=llm, prompt_class=prompt_class)

    def bank_for(query_id: str) -> QueryTestBank:
        for bank in ws.banks():
            if bank.query_id == query_id:
                return bank
        raise HTTPException(status_code=404, detail=f"unknown query {query_id!r}")

    def responses_for(query_id: str):
        subset = [r for r in ws.responses() if r.query_id == query_id]
        if not subset:
            raise HTTPException(status_code=404, detail=f"no responses for query {query_id!r}")
        return subset

    # ------------------------------------------------------------------ reads

    @app.get("/api/queries")
    def list_queries():
        queries = ws.queries()
        banks = {b.query_id: b for b in ws.banks()}
        passages = {r.query_id: len(r.passages) for r in ws.responses()}
        return [
            {
                "query_id": query_id,
                "query_text": text,
                "n_passages": passages.get(query_id, 0),
                "n_entries": len(banks[query_id].items) if query_id in banks else 0,
            }
            for query_id, text in sorted(queries.items())
        ]

    @app.get("/api/testbank/{query_id}")
    def get_testbank(query_id: str):
        bank = bank_for(query_id)
        return {
            "query_id": bank.query_id,
            "query_text": bank.query_text,
            "prompt_target": bank.prompt_target,
            "items": [
                {
                    "entry_id": e.entry_id,
                    "kind": e.kind,
                    "text": e.text,
                    "gold_answers": e.gold_answers,
                }
                for e in bank.items
            ],
        }

    @app.get("/api/grid/{query_id}")
    def get_grid(query_id: str, prompt_class: Optional[str] = None, llm: Optional[str] = None):
        grids = report_grid(responses_for(query_id), [bank_for(query_id)], grade_filter(prompt_class, llm))
        return grids[0].to_dict()

    @app.get("/api/verify-grading/{query_id}")
    def get_verify_grading(
        query_id: str, prompt_class: Optional[str] = None, llm: Optional[str] = None
    ):
        report = report_verify_grading(
            responses_for(query_id), [bank_for(query_id)], grade_filter(prompt_class, llm)
        )
        return report.to_dict()

    @app.get("/api/uncovered/{query_id}")
    def get_uncovered(
        query_id: str,
        min_judgment: int = 1,
        min_rating: int = 4,
        prompt_class: Optional[str] = None,
    ):
        report = report_uncovered(
            responses_for(query_id),
            [bank_for(query_id)],
            min_judgment,
            min_rating,
            grade_filter(prompt_class),
        )
        return [u.to_dict() for u in report]

    @app.get("/api/spurious/{query_id}")
    def get_spurious(
        query_id: str,
        max_judgment: int = 0,
        min_rating: int = 4,
        prompt_class: Optional[str] = None,
    ):
        report = report_spurious(
            responses_for(query_id),
            [bank_for(query_id)],
            max_judgment,
            min_rating,
            grade_filter(prompt_class),
        )
        return [s.to_dict() for s in report]

    @app.get("/api/leaderboard")
    def get_leaderboard(
        metric: Literal["cover", "mrr"] = "cover",
        k: int = 20,
        min_rating: int = 4,
        prompt_class: Optional[str] = None,
    ):
        body = RegradeBody(metric=metric, k=k, min_rating=min_rating)
        return _leaderboard(ws, body, grade_filter(prompt_class))

    @app.get("/api/kappa")
    def get_kappa(
        min_answers: int = 1,
        min_relevant_judgment: int = 1,
        prompt_class: Optional[str] = None,
    ):
        try:
            tables = ev.agreement_tables(
                ws.responses(),
                grade_filter(prompt_class),
                min_answers=min_answers,
                min_relevant_judgment=min_relevant_judgment,
            )
        except GradebenchError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return [t.to_dict() for t in tables]

    # ----------------------------------------------------------------- writes

    @app.post("/api/testbank/{query_id}/entries", status_code=201)
    def add_entry(query_id: str, body: AddEntryBody):
        with ws.write_lock:
            banks = ws.banks()
            for i, bank in enumerate(banks):
                if bank.query_id == query_id:
                    try:
                        banks[i] = apply_edit(
                            bank,
                            AddEntry(
                                text=body.text,
                                kind=body.kind,
                                gold_answers=tuple(body.gold_answers),
                            ),
                        )
                    except GradebenchError as exc:
                        raise HTTPException(status_code=409, detail=str(exc))
                    except ValueError as exc:
                        raise HTTPException(status_code=422, detail=str(exc))
                    ws.save_banks_atomic(banks)
                    return {"entry_id": banks[i].items[-1].entry_id}
            raise HTTPException(status_code=404, detail=f"unknown query {query_id!r}")

    @app.put("/api/testbank/{query_id}/entries/{entry_id:path}")
    def replace_entry(query_id: str, entry_id: str, body: ReplaceEntryBody):
        with ws.write_lock:
            banks = ws.banks()
            for i, bank in enumerate(banks):
                if bank.query_id == query_id:
                    try:
                        banks[i] = apply_edit(bank, ReplaceEntry(entry_id, body.new_text))
                    except GradebenchError as exc:
                        status = 404 if "no entry" in str(exc) else 409
                        raise HTTPException(status_code=status, detail=str(exc))
                    except ValueError as exc:
                        raise HTTPException(status_code=422, detail=str(exc))
                    ws.save_banks_atomic(banks)
                    new_id = next(
                        e.entry_id for e in banks[i].items if e.text == body.new_text
                    )
                    return {"entry_id": new_id}
            raise HTTPException(status_code=404, detail=f"unknown query {query_id!r}")

    @app.delete("/api/testbank/{query_id}/entries/{entry_id:path}")
    def delete_entry(query_id: str, entry_id: str):
        with ws.write_lock:
            banks = ws.banks()
            for i, bank in enumerate(banks):
                if bank.query_id == query_id:
                    try:
                        banks[i] = apply_edit(bank, RemoveEntry(entry_id))
                    except GradebenchError as exc:
                        raise HTTPException(status_code=404, detail=str(exc))
                    ws.save_banks_atomic(banks)
                    return {"removed": entry_id}
            raise HTTPException(status_code=404, detail=f"unknown query {query_id!r}")

    # ------------------------------------------------------------------- jobs

    def run_regrade(job_id: str, body: RegradeBody):
        job = jobs[job_id]
        job["status"] = "running"
        try:
            banks = ws.banks()
            mode = {"self-rated": "self_rated", "extract-verify": "extract_and_verify",
                    "extract": "extract_informational"}[body.mode]
            if body.prompt_class:
                template = load_template(body.prompt_class)
            else:
                target = "nugget" if banks and banks[0].prompt_target == "nuggets" else "question"
                template = default_template_for(target, self_rated=(mode == "self_rated"))
            backend = _backend_for(body)
            stripped = ws.responses()
            drop = GradeFilter(llm=backend.identifier, prompt_class=template.prompt_class)
            for record in stripped:
                for passage in record.passages:
                    passage.exam_grades = [
                        g for g in passage.exam_grades if not drop.matches(g)
                    ]
            outcome = grade_job(
                GradingJob(
                    responses=stripped,
                    banks=banks,
                    template=template,
                    backend=backend,
                    mode=mode,
                    queries=ws.queries(),
                )
            )
            with ws.write_lock:
                write_response_file_atomic(outcome.responses, ws.responses_path)
            job["failures"] = outcome.failures
            job["leaderboard_after"] = _leaderboard(ws, body, GradeFilter(), universe="grades")
            job["diff"] = _board_diff(job["leaderboard_before"], job["leaderboard_after"])
            job["status"] = "done"
        except Exception as exc:  # noqa: BLE001 - reported through job status
            job["error"] = f"{type(exc).__name__}: {exc}"
            job["status"] = "failed"
        finally:
            job_state["active"] = None

    @app.post("/api/regrade", status_code=202)
    def start_regrade(body: RegradeBody):
        with job_counter:
            if job_state["active"] is not None:
                active = jobs.get(job_state["active"], {})
                if active.get("status") in ("queued", "running"):
                    raise HTTPException(
                        status_code=409,
                        detail=f"regrade {job_state['active']} is already {active['status']}",
                    )
            job_id = f"job-{job_state['next_id']}"
            job_state["next_id"] += 1
            job_state["active"] = job_id
            jobs[job_id] = {
                "job_id": job_id,
                "status": "queued",
                "request": body.model_dump(),
                "failures": [],
                "leaderboard_before": _leaderboard(ws, body, GradeFilter(), universe="grades"),
                "leaderboard_after": None,
                "diff": None,
                "error": None,
            }
        thread = threading.Thread(target=run_regrade, args=(job_id, body), daemon=True)
        thread.start()
        return {"job_id": job_id}

    @app.get("/api/jobs")
    def list_jobs():
        return list(jobs.values())  # insertion order = creation order

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str):
        if job_id not in jobs:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
        return jobs[job_id]

    # --------------------------------------------------------------- static UI

    bundle = Path(ui_dir) if ui_dir else ws.root / "ui"
    if bundle.is_dir():
        app.mount("/", StaticFiles(directory=str(bundle), html=True), name="ui")

    return app
