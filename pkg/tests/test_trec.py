"""Run-file and qrels parsing, including line-accurate rejection."""

import pytest

from gradebench.errors import TrecFormatError
from gradebench.evaluation import parse_qrels, parse_run_file, write_qrels

GOOD_RUN = "940547 Q0 p12 1 17.5606 pash_f3\n940547 Q0 p13 2 16.0 pash_f3\n"


def test_parse_run_line(tmp_path):
    path = tmp_path / "run.txt"
    path.write_text(GOOD_RUN, encoding="utf-8")
    entries = parse_run_file(path)
    first = entries[0]
    assert first.method == "pash_f3"
    assert first.paragraph_id == "p12"
    assert first.query_id == "940547"
    assert first.rank == 1
    assert first.score == pytest.approx(17.5606)


def test_parse_qrels_line(tmp_path):
    path = tmp_path / "qrels.txt"
    path.write_text("940547 0 p12 2\n940547 0 p13 -2\n", encoding="utf-8")
    judgments = parse_qrels(path)
    assert judgments[0].relevance == 2
    assert judgments[0].paragraph_id == "p12"
    assert judgments[1].relevance == -2  # negative grades are legal


# Each fixture is (file content, 1-based line number where the error sits).
MALFORMED_RUNS = [
    (GOOD_RUN + "940547 Q0 p14 3 15.0\n", 3),  # 5 columns
    (GOOD_RUN + "940547 Q0 p14 3 15.0 tag extra\n", 3),  # 7 columns
    ("940547 Q0 p12 one 17.5 tag\n", 1),  # rank not an integer
    (GOOD_RUN + "940547 Q0 p14 0 15.0 pash_f3\n", 3),  # rank below 1
    ("940547 Q0 p12 1.5 17.5 tag\n", 1),  # fractional rank
    (GOOD_RUN + "940547 Q0 p14 -3 15.0 pash_f3\n", 3),  # negative rank
    (GOOD_RUN + "940547 Q0 p14 3 high pash_f3\n", 3),  # score not a number
    (GOOD_RUN + "940547 Q0 p14 1 15.0 pash_f3\n", 3),  # duplicate rank for (tag, qid)
    ("940547 Q0 p12 1 17.5 tag\n\n940547 Q0 p13 2 16.0 tag\n", 2),  # blank line
    ("940547 QX p12 1 17.5 tag\n", 1),  # second column is not Q0
]


@pytest.mark.parametrize("content,line_no", MALFORMED_RUNS)
def test_malformed_run_files_rejected_with_line(tmp_path, content, line_no):
    path = tmp_path / "bad_run.txt"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(TrecFormatError) as err:
        parse_run_file(path)
    assert err.value.line_no == line_no


def test_malformed_qrels_rejected(tmp_path):
    path = tmp_path / "bad_qrels.txt"
    path.write_text("940547 0 p12 2\n940547 0 p13\n", encoding="utf-8")
    with pytest.raises(TrecFormatError) as err:
        parse_qrels(path)
    assert err.value.line_no == 2
    path.write_text("940547 0 p12 high\n", encoding="utf-8")
    with pytest.raises(TrecFormatError) as err:
        parse_qrels(path)
    assert err.value.line_no == 1


def test_write_qrels_sorted_and_stable(tmp_path):
    labels = [("q2", "p1", 3), ("q1", "p9", 0), ("q1", "p1", 5)]
    a, b = tmp_path / "a.qrels", tmp_path / "b.qrels"
    write_qrels(labels, a)
    write_qrels(reversed(labels), b)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text(encoding="utf-8").splitlines() == [
        "q1 0 p1 5",
        "q1 0 p9 0",
        "q2 0 p1 3",
    ]


def test_qrels_round_trip(tmp_path):
    labels = [("q1", "p1", 5), ("q1", "p2", 0), ("q2", "p1", -1)]
    path = tmp_path / "x.qrels"
    write_qrels(labels, path)
    parsed = [(j.query, j.paragraph_id, j.relevance) for j in parse_qrels(path)]
    assert parsed == sorted(labels)
