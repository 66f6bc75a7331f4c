"""Command-line interface binding the phases into composable pipelines.

Each phase is its own subcommand so custom pipelines are a few lines of
shell.  Exit codes: 0 success, 1 validation/usage error, 2 runtime error.
Configuration precedence is flags > environment (GRADEBENCH_<FLAG>) > config
file; the API key is only ever read from an environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import evaluation as ev
from .backends import BackendConfig, MockBackend, RemoteBackend
from .errors import GradebenchError
from .grading import GradingJob, grade_job
from .models import QueryTestBank
from .prompts import (
    DEFAULT_WORD_BUDGET,
    default_template_for,
    is_builtin_prompt_class,
    load_template,
)
from .response_file import GradeFilter, load_queries, read_response_file, write_response_file
from .testbank import banks_by_query, generate_test_bank, load_test_bank, save_test_bank
from .verification import (
    render_grid_text,
    render_spurious_text,
    render_uncovered_text,
    render_verify_grading_text,
    report_grid,
    report_spurious,
    report_uncovered,
    report_verify_grading,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        raise _UsageError(message)


def _env_default(name: str, fallback=None):
    return os.environ.get(f"GRADEBENCH_{name.upper().replace('-', '_')}", fallback)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise _UsageError("config file must hold a JSON dictionary")
    return data


def _setting(args, config: dict, name: str, default=None):
    """flags > environment > config file > built-in default."""
    value = getattr(args, name.replace("-", "_"), None)
    if value is not None:
        return value
    env = _env_default(name)
    if env is not None:
        return env
    if name in config:
        return config[name]
    return default


def _make_backend(args, config: dict):
    kind = _setting(args, config, "backend", "mock")
    if kind == "mock":
        return MockBackend()
    if kind != "remote":
        raise _UsageError(f"unknown backend {kind!r} (choose mock or remote)")
    endpoint = _setting(args, config, "endpoint")
    model = _setting(args, config, "model")
    if not endpoint or not model:
        raise _UsageError("remote backend needs --endpoint and --model")
    return RemoteBackend(
        BackendConfig(
            endpoint_url=endpoint,
            model_name=model,
            api_key_source=_setting(args, config, "api-key-env", "GRADER_API_KEY"),
            max_input_tokens=int(_setting(args, config, "max-tokens", 512)),
            request_timeout=float(_setting(args, config, "timeout", 30.0)),
            max_retries=int(_setting(args, config, "retries", 3)),
            concurrency_budget=int(_setting(args, config, "jobs", 4) or 4),
        )
    )


def _grade_filter(args) -> GradeFilter:
    return GradeFilter(
        llm=getattr(args, "llm", None),
        prompt_class=getattr(args, "prompt_class", None),
        is_self_rated=None,
    )


def _write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _write_json(path: Path, payload):
    _write_text(path, json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_generate(args, config):
    queries = load_queries(args.queries)
    backend = _make_backend(args, config)
    banks: list[QueryTestBank] = []
    for query_id in sorted(queries):
        banks.append(
            generate_test_bank(
                query_id, queries[query_id], args.target, backend, flavor=args.flavor
            )
        )
    save_test_bank(banks, args.out, withhold_fraction=args.withhold_fraction)
    print(f"wrote {len(banks)} test banks to {args.out}")
    return 0


_MODE_BY_FLAG = {
    "self-rated": "self_rated",
    "extract-verify": "extract_and_verify",
    "extract": "extract_informational",
    "direct": "direct",
}


def _cmd_grade(args, config):
    responses = read_response_file(args.responses)
    mode = _MODE_BY_FLAG[args.mode]
    banks = load_test_bank(args.testbank) if args.testbank else []
    if mode != "direct" and not banks:
        raise _UsageError("grading without --testbank is only possible with --mode direct")

    bank_target = "nugget" if (banks and banks[0].prompt_target == "nuggets") else "question"
    if args.prompt_class:
        custom = not is_builtin_prompt_class(args.prompt_class)
        template = load_template(
            args.prompt_class,
            template_dir=args.template_dir,
            target=("direct" if mode == "direct" else bank_target) if custom else None,
            is_self_rated=args.self_rated_template,
        )
    elif mode == "direct":
        template = default_template_for("direct")
    else:
        template = default_template_for(bank_target, self_rated=(mode == "self_rated"))

    started_at = datetime.now(timezone.utc).isoformat()
    queries = load_queries(args.queries) if args.queries else None
    job = GradingJob(
        responses=responses,
        banks=banks,
        template=template,
        backend=_make_backend(args, config),
        mode=mode,
        queries=queries,
        budget=int(_setting(args, config, "budget", DEFAULT_WORD_BUDGET)),
        jobs=int(_setting(args, config, "jobs", 1) or 1),
    )
    outcome = grade_job(job)
    write_response_file(outcome.responses, args.out, compress=str(args.out).endswith(".gz"))
    manifest_path = Path(args.manifest) if args.manifest else Path(str(args.out) + ".manifest.json")
    manifest = dict(outcome.manifest)
    manifest["started_at"] = started_at
    manifest["finished_at"] = datetime.now(timezone.utc).isoformat()
    _write_json(manifest_path, manifest)
    print(
        f"graded {manifest['n_passages']} passages over {manifest['n_queries']} queries "
        f"({manifest['n_failures']} failures) -> {args.out}"
    )
    return 0


def _cmd_analyze(args, config):
    responses = read_response_file(args.responses)
    banks = load_test_bank(args.testbank)
    grade_filter = _grade_filter(args)
    out = Path(args.out_dir)
    prefix = args.prefix

    verify = report_verify_grading(responses, banks, grade_filter)
    _write_text(out / f"{prefix}-verify-grading.txt", render_verify_grading_text(verify))
    _write_json(out / f"{prefix}-verify-grading.json", verify.to_dict())

    grid = report_grid(responses, banks, grade_filter)
    _write_text(out / f"{prefix}-grid-display.txt", render_grid_text(grid))
    _write_json(out / f"{prefix}-grid-display.json", [g.to_dict() for g in grid])

    uncovered = report_uncovered(
        responses, banks, args.min_judgment, args.min_rating, grade_filter
    )
    _write_text(out / f"{prefix}-uncovered-passages.txt", render_uncovered_text(uncovered))
    _write_json(out / f"{prefix}-uncovered-passages.json", [u.to_dict() for u in uncovered])

    spurious = report_spurious(
        responses, banks, args.max_judgment, args.min_rating, grade_filter
    )
    _write_text(out / f"{prefix}-bad-question.txt", render_spurious_text(spurious))
    _write_json(out / f"{prefix}-bad-question.json", [s.to_dict() for s in spurious])

    print(f"wrote 4 reports to {out}/{prefix}-*.txt")
    return 0


def _cmd_export_qrels(args, config):
    responses = read_response_file(args.responses)
    out = args.out or str(
        Path(args.out_dir) / ev.qrels_file_name(args.prefix, args.prompt_class, args.min_rating)
    )
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    labels = ev.export_qrels(
        responses,
        out,
        _grade_filter(args),
        scheme=args.scheme.replace("-", "_"),
        min_rating=args.min_rating,
        min_answers=args.min_answers,
    )
    print(f"wrote {len(labels)} labels to {out}")
    return 0


def _leaderboard_out(args, kind: str) -> str:
    if args.out:
        return args.out
    return str(Path(args.out_dir) / ev.qrels_file_name(args.prefix, args.prompt_class, args.min_rating, kind))


def _cmd_leaderboard(args, config):
    responses = read_response_file(args.responses)
    scores = ev.qrels_leaderboard_scores(
        responses,
        _grade_filter(args),
        metric=args.metric,
        min_rating=args.min_rating,
        min_answers=args.min_answers,
        k=args.k,
    )
    reference = ev.load_reference_ranks(args.reference) if args.reference else None
    board = ev.build_leaderboard(scores, metric_name=args.metric.upper(), reference_ranks=reference)
    out = _leaderboard_out(args, "qrels-leaderboard")
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    ev.write_leaderboard_tsv(board, out)
    print(f"wrote leaderboard ({board.metric_name}) to {out}")
    return 0


def _cmd_cover(args, config):
    responses = read_response_file(args.responses)
    banks = banks_by_query(load_test_bank(args.testbank))
    scores, excluded = ev.cover_leaderboard_scores(
        responses,
        banks,
        k=args.k,
        min_rating=args.min_rating,
        grade_filter=_grade_filter(args),
        normalize=args.normalize,
    )
    reference = ev.load_reference_ranks(args.reference) if args.reference else None
    name = "nEXAM" if args.normalize else f"Cover@{args.k}"
    board = ev.build_leaderboard(scores, metric_name=name, reference_ranks=reference)
    board.excluded_queries = excluded
    out = _leaderboard_out(args, "cover-leaderboard")
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    ev.write_leaderboard_tsv(board, out)
    if excluded:
        print(f"excluded queries with nothing answerable: {', '.join(excluded)}")
    print(f"wrote coverage leaderboard to {out}")
    return 0


def _cmd_correlate(args, config):
    scores: dict[str, list[float]] = {}
    with open(args.leaderboard, "r", encoding="utf-8") as handle:
        for line in handle:
            parts = line.rstrip("\n").split("\t")
            if len(parts) < 2 or parts[0] in ("spearman", "kendall"):
                continue
            scores[parts[0]] = [float(parts[1])]
    reference = ev.load_reference_ranks(args.reference)
    board = ev.build_leaderboard(scores, metric_name="correlation", reference_ranks=reference)
    lines = []
    if board.spearman is not None:
        lines.append(f"spearman\t{board.spearman:.6f}")
    if board.kendall is not None:
        lines.append(f"kendall\t{board.kendall:.6f}")
    text = "".join(line + "\n" for line in lines)
    if args.out:
        _write_text(Path(args.out), text)
        print(f"wrote correlations to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_kappa(args, config):
    responses = read_response_file(args.responses)
    tables = ev.agreement_tables(
        responses,
        _grade_filter(args),
        min_answers=args.min_answers,
        min_relevant_judgment=args.min_relevant_judgment,
    )
    text = ev.render_tables_text(tables, args.min_relevant_judgment)
    if args.out:
        _write_text(Path(args.out), text)
        print(f"wrote agreement tables to {args.out}")
    else:
        sys.stdout.write(text)
    if args.json_out:
        _write_json(Path(args.json_out), [t.to_dict() for t in tables])
    return 0


def _cmd_serve(args, config):
    import uvicorn

    from .service import create_app

    app = create_app(
        workspace=args.workspace,
        queries_name=args.queries_name,
        testbank_name=args.testbank_name,
        responses_name=args.responses_name,
        ui_dir=args.ui_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> _Parser:
    parser = _Parser(
        prog="gradebench",
        description="Autograde retrieval/generation responses against a test bank "
        "of exam questions and nuggets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common_flags(p):
        p.add_argument("--config", help="JSON config file with flag defaults")

    def backend_flags(p):
        p.add_argument("--backend", choices=["mock", "remote"], default=None,
                       help="grading backend (default mock)")
        p.add_argument("--model", help="model name for the remote backend")
        p.add_argument("--endpoint", help="chat-completion endpoint URL")
        p.add_argument("--api-key-env", default=None,
                       help="environment variable holding the API key (default GRADER_API_KEY)")
        p.add_argument("--jobs", type=int, default=None, help="worker concurrency")

    def filter_flags(p):
        p.add_argument("--prompt-class", help="only use grades from this prompt class")
        p.add_argument("--llm", help="only use grades from this backend identifier")

    p = sub.add_parser("generate", help="phase 1: generate a test bank from queries")
    p.add_argument("--queries", required=True, help="JSON dictionary query_id -> query text")
    p.add_argument("--target", choices=["questions", "nuggets"], required=True)
    p.add_argument("--out", required=True, help="output test-bank .jsonl[.gz]")
    p.add_argument("--flavor", choices=["dl", "car"], default="dl",
                   help="generation prompt flavor (plain query vs title/subtopic)")
    p.add_argument("--withhold-fraction", type=float, default=0.0,
                   help="fraction of entries to keep out of the written file")
    backend_flags(p)
    common_flags(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("grade", help="phase 2: grade responses against the test bank")
    p.add_argument("--responses", required=True, help="response .jsonl[.gz] to grade")
    p.add_argument("--testbank", help="test-bank file (not needed for --mode direct)")
    p.add_argument("--queries", help="queries JSON (query text source for --mode direct)")
    p.add_argument("--out", required=True, help="graded output file; input is preserved")
    p.add_argument("--mode", choices=sorted(_MODE_BY_FLAG), default="self-rated")
    p.add_argument("--prompt-class", help="grading prompt class (default per mode/bank)")
    p.add_argument("--template-dir", help="directory of <prompt_class>.txt template files")
    p.add_argument("--self-rated-template", action=argparse.BooleanOptionalAction,
                   default=None,
                   help="whether custom template completions are 0-5 self-ratings")
    p.add_argument("--budget", type=int, default=None, help="prompt word budget")
    p.add_argument("--manifest", help="where to write the grading manifest JSON")
    backend_flags(p)
    common_flags(p)
    p.set_defaults(func=_cmd_grade)

    p = sub.add_parser("analyze", help="phase 3: write the four oversight reports")
    p.add_argument("--responses", required=True)
    p.add_argument("--testbank", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--prefix", default="report")
    p.add_argument("--min-judgment", type=int, default=1,
                   help="judgment at or above this counts as relevant (uncovered report)")
    p.add_argument("--max-judgment", type=int, default=0,
                   help="judgment at or below this counts as non-relevant (spurious report)")
    p.add_argument("--min-rating", type=int, default=4)
    filter_flags(p)
    common_flags(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("export-qrels", help="phase 4: export relevance labels")
    p.add_argument("--responses", required=True)
    p.add_argument("--out", help="explicit output path")
    p.add_argument("--out-dir", default=".", help="directory for the conventional filename")
    p.add_argument("--prefix", default="graded")
    p.add_argument("--scheme", choices=["max-grade", "count-covered"], default="max-grade")
    p.add_argument("--min-rating", type=int, default=4)
    p.add_argument("--min-answers", type=int, default=1)
    filter_flags(p)
    common_flags(p)
    p.set_defaults(func=_cmd_export_qrels)

    p = sub.add_parser("leaderboard", help="phase 4: ranking leaderboard from derived labels")
    p.add_argument("--responses", required=True)
    p.add_argument("--out", help="explicit output path")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--prefix", default="graded")
    p.add_argument("--metric", choices=["mrr", "precision"], default="mrr")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--min-rating", type=int, default=4)
    p.add_argument("--min-answers", type=int, default=1)
    p.add_argument("--reference", help="reference leaderboard JSON (method -> rank)")
    filter_flags(p)
    common_flags(p)
    p.set_defaults(func=_cmd_leaderboard)

    p = sub.add_parser("cover", help="phase 4: coverage leaderboard")
    p.add_argument("--responses", required=True)
    p.add_argument("--testbank", required=True)
    p.add_argument("--out", help="explicit output path")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--prefix", default="graded")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--min-rating", type=int, default=4)
    p.add_argument("--normalize", action="store_true",
                   help="normalize by the per-query answerable fraction")
    p.add_argument("--reference", help="reference leaderboard JSON (method -> rank)")
    filter_flags(p)
    common_flags(p)
    p.set_defaults(func=_cmd_cover)

    p = sub.add_parser("correlate", help="rank correlations of a leaderboard vs a reference")
    p.add_argument("--leaderboard", required=True, help="leaderboard TSV (method, score, ...)")
    p.add_argument("--reference", required=True)
    p.add_argument("--out")
    common_flags(p)
    p.set_defaults(func=_cmd_correlate)

    p = sub.add_parser("kappa", help="inter-annotator agreement tables")
    p.add_argument("--responses", required=True)
    p.add_argument("--min-answers", type=int, default=1)
    p.add_argument("--min-relevant-judgment", type=int, default=1,
                   help="judgment threshold for binary schemes (TREC DL needs 2)")
    p.add_argument("--out")
    p.add_argument("--json-out")
    filter_flags(p)
    common_flags(p)
    p.set_defaults(func=_cmd_kappa)

    p = sub.add_parser("serve", help="start the verification web service")
    p.add_argument("--workspace", required=True, help="directory with queries/testbank/responses")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--queries-name", default="queries.json")
    p.add_argument("--testbank-name", default="testbank.jsonl.gz")
    p.add_argument("--responses-name", default="responses.jsonl.gz")
    p.add_argument("--ui-dir", help="built UI bundle to serve at / (default <workspace>/ui)")
    common_flags(p)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _load_config(args.config)
        return args.func(args, config)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: missing input: {exc}", file=sys.stderr)
        return 1
    except GradebenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
