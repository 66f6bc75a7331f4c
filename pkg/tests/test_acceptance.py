"""Acceptance suite: one test per acceptance criterion, at stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion.  Everything here is offline; the only backend used is the mock.
"""

import math
import random
import statistics
from pathlib import Path

import pytest

from gradebench.cli import main as cli_main
from gradebench.errors import TrecFormatError
from gradebench.evaluation import (
    agreement_tables,
    cohen_kappa,
    export_qrels,
    kendall_tau,
    parse_qrels,
    parse_run_file,
    rubric_cover,
    spearman,
)
from gradebench.grading import is_unanswerable, segment_text, verify_answer_key
from gradebench.models import (
    ExamGrade,
    GradedPassage,
    Judgment,
    ParagraphData,
    PromptInfo,
    QueryResponseSet,
    QueryTestBank,
    RankingEntry,
    SelfRating,
    TestBankEntry,
)
from gradebench.prompts import load_template, render_prompt, token_count
from gradebench.errors import BudgetError

from conftest import make_grade, make_passage, make_record

GOLDEN = Path(__file__).parent / "golden"


def ok(line: str):
    print(f"ACCEPTANCE PASS: {line}")


# =========================================================================
# 1. Cohen's kappa reproduction (exact published numbers), +-0.005


def test_acceptance_cohen_kappa_reproduction():
    question = cohen_kappa(998, 2377, 668, 7343)
    nugget = cohen_kappa(1211, 4095, 455, 5625)
    assert question == pytest.approx(0.25, abs=0.005)
    assert nugget == pytest.approx(0.16, abs=0.005)
    ok(f"cohen_kappa reproduces published inter-annotator values "
       f"({question:.4f}~0.25, {nugget:.4f}~0.16)")


# =========================================================================
# 2. Appendix table reproduction (min answers 1/2/5), every kappa +-0.005

# Joint (label x judgment) counts of the published question-bank GRADED
# tables; columns are judgments 3, 2, 1, 0.  The MERGE/LENIENT/STRICT tables
# are aggregations of these counts, so realizing the GRADED multiset
# realizes all four schemes.
QUESTION_GRADED_COUNTS = {
    1: {5: (197, 256, 281, 679), 4: (275, 546, 927, 2030), 3: (20, 28, 49, 237),
        2: (9, 33, 106, 499), 1: (8, 10, 20, 192), 0: (137, 147, 557, 4143)},
    2: {5: (64, 87, 80, 276), 4: (325, 522, 720, 1301), 3: (23, 35, 61, 255),
        2: (14, 54, 120, 299), 1: (4, 14, 17, 75), 0: (216, 308, 942, 5574)},
    5: {5: (3, 7, 3, 60), 4: (141, 161, 197, 242), 3: (23, 45, 41, 104),
        2: (21, 35, 42, 85), 1: (4, 4, 2, 18), 0: (454, 768, 1655, 7271)},
}

PUBLISHED_KAPPAS = {
    1: {"GRADED": {"5": 0.12, "4": 0.03, "3": -0.003, "2": -0.032, "1": -0.018, "0": 0.25},
        "MERGE": {"4+5": 0.068, "1+2+3": -0.037, "0": 0.14},
        "LENIENT": {"1+2+3+4+5": 0.14, "0": 0.14},
        "STRICT": {"4+5": 0.19, "0+1+2+3": 0.19}},
    2: {"GRADED": {"5": 0.064, "4": 0.1, "3": 0.0023, "2": 0.015, "1": 0.0075, "0": 0.29},
        "MERGE": {"4+5": 0.11, "1+2+3": 0.018, "0": 0.21},
        "LENIENT": {"1+2+3+4+5": 0.21, "0": 0.21},
        "STRICT": {"4+5": 0.25, "0+1+2+3": 0.25}},
    5: {"GRADED": {"5": -0.0032, "4": 0.15, "3": 0.043, "2": 0.032, "1": 0.0029, "0": 0.17},
        "MERGE": {"4+5": 0.14, "1+2+3": 0.067, "0": 0.21},
        "LENIENT": {"1+2+3+4+5": 0.21, "0": 0.21},
        "STRICT": {"4+5": 0.17, "0+1+2+3": 0.17}},
}


def responses_realizing(joint: dict, min_answers: int) -> list[QueryResponseSet]:
    """Passages whose min_answers-th largest rating realizes each (label, judgment)."""
    info = PromptInfo(prompt_class="acceptance", is_self_rated=True)
    passages = []
    serial = 0
    for label, counts in joint.items():
        ratings = [
            SelfRating(question_id=f"q/e{i}", self_rating=label) for i in range(min_answers)
        ]
        for judgment, count in zip((3, 2, 1, 0), counts):
            for _ in range(count):
                serial += 1
                pid = f"p{serial}"
                passages.append(
                    GradedPassage(
                        paragraph_id=pid,
                        text="",
                        paragraph_data=ParagraphData(
                            judgments=[
                                Judgment(paragraphId=pid, query="q",
                                         relevance=judgment, titleQuery="q")
                            ]
                        ),
                        exam_grades=[
                            ExamGrade(self_ratings=ratings, llm="fixture", prompt_info=info)
                        ],
                    )
                )
    return [QueryResponseSet(query_id="q", passages=passages)]


def test_acceptance_appendix_table_reproduction():
    checked = 0
    for min_answers, joint in QUESTION_GRADED_COUNTS.items():
        responses = responses_realizing(joint, min_answers)
        tables = agreement_tables(responses, min_answers=min_answers, min_relevant_judgment=2)
        assert tables[0].n == 11386
        for table in tables:
            for row in table.rows:
                want = PUBLISHED_KAPPAS[min_answers][table.scheme][row.label]
                assert row.kappa == pytest.approx(want, abs=0.005), (
                    f"min_answers={min_answers} {table.scheme} row {row.label}: "
                    f"got {row.kappa:.4f}, published {want}"
                )
                checked += 1
    # spot values named in the acceptance criteria
    strict_m1 = agreement_tables(
        responses_realizing(QUESTION_GRADED_COUNTS[1], 1), min_answers=1, min_relevant_judgment=2
    )[3]
    assert strict_m1.row("4+5").counts == [1274, 3917]
    assert strict_m1.row("0+1+2+3").counts == [392, 5803]
    ok(f"agreement_tables reproduces all {checked} published kappas "
       f"for min answers 1/2/5 within +-0.005")


# =========================================================================
# 3. Correlation oracle equivalence (1000 random integer vectors, exact)


def oracle_spearman(a, b):
    from fractions import Fraction

    ranks = lambda vals: [
        Fraction(sum(1 for o in vals if o < v), 1)
        + Fraction(sum(1 for o in vals if o == v) + 1, 2)
        for v in vals
    ]
    ra, rb = ranks(a), ranks(b)
    n = len(a)
    sum_a, sum_b = sum(ra), sum(rb)
    sxy = sum(x * y for x, y in zip(ra, rb)) - Fraction(sum_a * sum_b, n)
    sxx = sum(x * x for x in ra) - Fraction(sum_a * sum_a, n)
    syy = sum(y * y for y in rb) - Fraction(sum_b * sum_b, n)
    return float(sxy) / math.sqrt(float(sxx * syy))


def oracle_kendall(a, b):
    n = len(a)
    concordant = discordant = ties_a = ties_b = 0
    for i in range(n):
        for j in range(i + 1, n):
            da, db = a[i] - a[j], b[i] - b[j]
            if da == 0:
                ties_a += 1
            if db == 0:
                ties_b += 1
            if da * db > 0:
                concordant += 1
            elif da * db < 0:
                discordant += 1
    n0 = n * (n - 1) // 2
    return (concordant - discordant) / math.sqrt((n0 - ties_a) * (n0 - ties_b))


def test_acceptance_correlation_oracle_equivalence():
    rng = random.Random(42)
    compared = 0
    for _ in range(1000):
        n = rng.randint(2, 12)
        a = [rng.randint(-5, 5) for _ in range(n)]
        b = [rng.randint(-5, 5) for _ in range(n)]
        if len(set(a)) < 2 or len(set(b)) < 2:
            continue  # correlation undefined; the error path is tested elsewhere
        assert spearman(a, b) == oracle_spearman(a, b)
        assert kendall_tau(a, b) == oracle_kendall(a, b)
        compared += 1
    assert compared >= 900
    ok(f"spearman and kendall_tau match the brute-force oracle exactly on "
       f"{compared} random vectors with ties")


# =========================================================================
# 4. Rubric-Cover oracle equivalence (500 random toy instances, exact)


def random_cover_instance(rng):
    records, banks = [], {}
    n_queries = rng.randint(1, 5)
    any_ranking = False
    for qi in range(n_queries):
        qid = f"q{qi}"
        n_entries = rng.randint(1, 10)
        entry_ids = [f"{qid}/e{i}" for i in range(n_entries)]
        banks[qid] = QueryTestBank(
            query_id=qid, query_text="t", prompt_target="questions",
            items=[TestBankEntry(entry_id=e, query_id=qid, kind="question", text=e)
                   for e in entry_ids],
        )
        n_passages = rng.randint(1, 30)
        ranks = list(range(1, n_passages + 1))
        rng.shuffle(ranks)
        passages = []
        info = PromptInfo(prompt_class="acceptance", is_self_rated=True)
        for pi in range(n_passages):
            pid = f"{qid}-p{pi}"
            rated = rng.sample(entry_ids, rng.randint(0, n_entries))
            grades = []
            if rated:
                grades.append(
                    ExamGrade(
                        self_ratings=[
                            SelfRating(question_id=e, self_rating=rng.randint(0, 5))
                            for e in sorted(rated)
                        ],
                        llm="fixture", prompt_info=info,
                    )
                )
            rankings = []
            if rng.random() < 0.85:
                any_ranking = True
                rankings.append(
                    RankingEntry(method="m", paragraphId=pid, queryId=qid,
                                 rank=ranks[pi], score=float(-ranks[pi]))
                )
            passages.append(
                GradedPassage(paragraph_id=pid, text="",
                              paragraph_data=ParagraphData(rankings=rankings),
                              exam_grades=grades)
            )
        records.append(QueryResponseSet(query_id=qid, passages=passages))
    return records, banks, any_ranking


def enumerate_cover(records, banks, k, min_rating):
    """Exhaustive set enumeration straight off the raw model objects."""
    per_query = []
    for record in records:
        bank = banks[record.query_id]
        covered = set()
        for entry in bank.items:
            for passage in record.passages:
                ranked_in = any(
                    r.method == "m" and r.rank <= k for r in passage.paragraph_data.rankings
                )
                if not ranked_in:
                    continue
                best = -1
                for grade in passage.exam_grades:
                    for sr in grade.self_ratings:
                        if sr.question_id == entry.entry_id:
                            best = max(best, sr.self_rating)
                if best >= min_rating:
                    covered.add(entry.entry_id)
        per_query.append(len(covered) / len(bank.items))
    mean = statistics.mean(per_query)
    std_error = (
        statistics.stdev(per_query) / math.sqrt(len(per_query)) if len(per_query) > 1 else 0.0
    )
    return mean, std_error


def test_acceptance_rubric_cover_oracle_equivalence():
    rng = random.Random(7)
    trials = 0
    while trials < 500:
        records, banks, any_ranking = random_cover_instance(rng)
        if not any_ranking:
            continue
        k = rng.randint(1, 10)
        min_rating = rng.randint(1, 5)
        got = rubric_cover(records, banks, "m", k=k, min_rating=min_rating)
        want = enumerate_cover(records, banks, k, min_rating)
        assert got == want
        trials += 1
    ok("rubric_cover matches exhaustive set enumeration exactly on 500 random instances")


# =========================================================================
# 5. Answer verification


def test_acceptance_answer_verification():
    assert verify_answer_key("rising", ["rise"]) is True
    assert verify_answer_key("fall", ["rise"]) is False

    expressions = [
        "unanswerable", "no", "no answer", "not enough information", "unknown",
        "it is not possible to tell", "it does not say", "no relevant information",
    ]
    for phrase in expressions:
        assert is_unanswerable(phrase) is True, phrase
    for marker in ("a.", "(iii)"):
        assert is_unanswerable(marker) is True, marker

    substantive = [
        "Elvis Presley", "rise", "increase substantially", "the early 1950s",
        "epidermis", "a capful of bleach", "rhythm and blues", "north of the river",
        "nothing beats peroxide", "mill towns", "civil war", "groundwater recharge",
        "saturated soil", "chlorine bleach", "electric blues", "radio stations",
        "country swing", "the water table", "peroxide solution", "young audiences",
    ]
    assert len(substantive) == 20
    for answer in substantive:
        assert is_unanswerable(answer) is False, answer
    ok("answer key verification and unanswerability detection match the published rules")


# =========================================================================
# 6. Budget and segmentation invariants (10,000 randomized calls)


def test_acceptance_budget_and_segmentation():
    rng = random.Random(123)
    templates = [
        load_template("QuestionSelfRatedUnanswerablePromptWithChoices"),
        load_template("NuggetSelfRatedPrompt"),
        load_template("QuestionCompleteConciseUnanswerablePromptWithChoices"),
        load_template("NuggetExtractionPrompt"),
    ]
    vocabulary = ["alpha", "beta", "gamma", "delta\n", "x", "committee,", "42"]
    rendered = 0
    for _ in range(10_000):
        template = rng.choice(templates)
        entry = " ".join(rng.choices(vocabulary, k=rng.randint(1, 30)))
        context = " ".join(rng.choices(vocabulary, k=rng.randint(0, 1200)))
        budget = rng.randint(100, 700)
        try:
            prompt = render_prompt(template, entry, context, budget=budget)
        except BudgetError:
            base = template.render(entry, "")
            assert token_count(base) > budget
            continue
        assert token_count(prompt) <= budget
        rendered += 1
    assert rendered > 9000

    for _ in range(300):
        target = rng.randint(5, 300)
        paragraphs = [
            " ".join(rng.choices(vocabulary, k=rng.randint(1, 2 * target)))
            for _ in range(rng.randint(1, 10))
        ]
        text = "\n\n".join(paragraphs)
        segments = segment_text(text, target_tokens=target)
        assert sum(len(s.split()) for s, _ in segments) == len(text.split())
        assert all(len(s.split()) <= 2 * target for s, _ in segments)
    ok("10,000 renders never exceeded the budget; segmentation preserves "
       "word counts under the 2x cap")


# =========================================================================
# 7. End-to-end determinism on the bundled toy collection (no network)

PIPELINE_ARTIFACTS = (
    "bank.jsonl.gz",
    "graded.jsonl.gz",
    "toy-rubric-qrels-all-minrating-4.solo.qrels",
    "toy-rubric-qrels-leaderboard-all-minrating-4.solo.mrr.tsv",
    "toy-rubric-cover-leaderboard-all-minrating-4.solo.tsv",
)


def run_pipeline(toy_dir: Path, out: Path):
    out.mkdir()
    bank, graded = out / "bank.jsonl.gz", out / "graded.jsonl.gz"
    assert cli_main(["generate", "--queries", str(toy_dir / "queries.json"),
                     "--target", "questions", "--out", str(bank), "--backend", "mock"]) == 0
    assert cli_main(["grade", "--responses", str(toy_dir / "responses.jsonl.gz"),
                     "--testbank", str(bank), "--out", str(graded), "--backend", "mock"]) == 0
    assert cli_main(["export-qrels", "--responses", str(graded), "--out-dir", str(out),
                     "--prefix", "toy", "--min-rating", "4"]) == 0
    assert cli_main(["leaderboard", "--responses", str(graded), "--out-dir", str(out),
                     "--prefix", "toy", "--min-rating", "4",
                     "--reference", str(toy_dir / "official-leaderboard.json")]) == 0
    assert cli_main(["cover", "--responses", str(graded), "--testbank", str(bank),
                     "--out-dir", str(out), "--prefix", "toy", "--k", "2"]) == 0


def test_acceptance_end_to_end_determinism(tmp_path, toy_dir):
    first, second = tmp_path / "run1", tmp_path / "run2"
    run_pipeline(toy_dir, first)
    run_pipeline(toy_dir, second)
    for name in PIPELINE_ARTIFACTS:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name
        golden = GOLDEN / name
        assert golden.exists(), f"golden file {name} missing"
        assert (first / name).read_bytes() == golden.read_bytes(), f"{name} != golden"
    ok("generate -> grade -> export-qrels -> leaderboard is byte-identical "
       "across runs and matches the frozen golden files")


# =========================================================================
# 8. Format fidelity


def test_acceptance_format_fidelity(tmp_path):
    # lossless qrels reexport
    records = [
        make_record("q1", [
            make_passage("p1", grades=[make_grade({"q1/e0": 5, "q1/e1": 2})]),
            make_passage("p2", grades=[make_grade({"q1/e0": 0})]),
        ]),
        make_record("q2", [make_passage("p9", grades=[make_grade({"q2/e0": 4})])]),
    ]
    path = tmp_path / "labels.qrels"
    labels = export_qrels(records, path, min_rating=4, min_answers=1)
    parsed = [(j.query, j.paragraph_id, j.relevance) for j in parse_qrels(path)]
    assert parsed == labels

    good = "940547 Q0 p12 1 17.5606 pash_f3\n940547 Q0 p13 2 16.0 pash_f3\n"
    malformed = [
        (good + "940547 Q0 p14 3 15.0\n", 3),
        (good + "940547 Q0 p14 3 15.0 tag extra\n", 3),
        ("940547 Q0 p12 one 17.5 tag\n", 1),
        (good + "940547 Q0 p14 0 15.0 pash_f3\n", 3),
        ("940547 Q0 p12 1.5 17.5 tag\n", 1),
        (good + "940547 Q0 p14 -3 15.0 pash_f3\n", 3),
        (good + "940547 Q0 p14 3 high pash_f3\n", 3),
        (good + "940547 Q0 p14 1 15.0 pash_f3\n", 3),
        ("940547 Q0 p12 1 17.5 tag\n\n940547 Q0 p13 2 16.0 tag\n", 2),
        ("940547 QX p12 1 17.5 tag\n", 1),
    ]
    assert len(malformed) == 10
    for i, (content, line_no) in enumerate(malformed):
        bad = tmp_path / f"bad{i}.run"
        bad.write_text(content, encoding="utf-8")
        with pytest.raises(TrecFormatError) as err:
            parse_run_file(bad)
        assert err.value.line_no == line_no, f"fixture {i}"
    ok("qrels reexport is lossless; all 10 malformed run files rejected "
       "with line-accurate errors")
