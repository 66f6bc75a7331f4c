#!/usr/bin/env python3
"""Regenerate the bundled toy collection under src/gradebench/data/toy/.

The toy collection is three queries with five passages each, carrying manual
judgments and rankings from three systems (alpha > bravo > charlie), sized so
the whole pipeline runs offline with the mock backend in well under a second.
"""

from pathlib import Path

from gradebench.models import GradedPassage, Judgment, ParagraphData, QueryResponseSet, RankingEntry
from gradebench.response_file import save_queries, write_response_file

OUT = Path(__file__).resolve().parents[1] / "src" / "gradebench" / "data" / "toy"

QUERIES = {
    "q1": "what started rock and roll music",
    "q2": "how to whiten clothes with bleach",
    "q3": "water table rise in wet seasons",
}

TEXTS = {
    "q1-p1": "Rock and roll music started in the early 1950s. Pioneers blended rhythm "
             "traditions into a new sound, and the music quickly spread.",
    "q1-p2": "Early rock and roll drew heavily on electric blues. Radio stations helped "
             "rock and roll reach young audiences.",
    "q1-p3": "Music critics disagree about genre boundaries. Any era's popular music "
             "reflects its recording technology.",
    "q1-p4": "Railway construction in the nineteenth century reshaped freight logistics "
             "across the continent.",
    "q1-p5": "The first rock and roll records mixed country swing with rhythm patterns, "
             "and the new music felt dangerous to parents.",
    "q2-p1": "Use bleach to whiten white clothes. Add a capful of bleach when washing "
             "clothes, or try a gentler peroxide solution.",
    "q2-p2": "Chlorine bleach removes most stains from cotton clothes but weakens fibers "
             "over time.",
    "q2-p3": "Sort clothes by color before washing. Cold temperatures protect delicate fabrics.",
    "q2-p4": "The municipal treatment plant reports quarterly on mineral content.",
    "q2-p5": "Annual rainfall statistics for the region show a mild monsoon pattern.",
    "q3-p1": "The water table will rise during wet seasons. Saturated soil lets groundwater "
             "levels rise until the water table reaches the surface.",
    "q3-p2": "Groundwater sits below the surface; the water table marks the boundary of "
             "saturation.",
    "q3-p3": "Wet seasons bring weeks of sustained rainfall to the tropics.",
    "q3-p4": "Office chair procurement guidelines require ergonomic armrests and lumbar "
             "support.",
    "q3-p5": "Heavy rain makes aquifer levels rise, and water storage recovers.",
}

JUDGMENTS = {
    "q1-p1": 3, "q1-p2": 2, "q1-p3": 1, "q1-p4": 0,
    "q2-p1": 3, "q2-p2": 2, "q2-p3": 1, "q2-p4": 0,
    "q3-p1": 3, "q3-p2": 2, "q3-p3": 1, "q3-p4": 0, "q3-p5": 2,
}

RANKINGS = {
    "q1": {
        "alpha": ["q1-p1", "q1-p2", "q1-p3", "q1-p5", "q1-p4"],
        "bravo": ["q1-p2", "q1-p3", "q1-p1", "q1-p4", "q1-p5"],
        "charlie": ["q1-p4", "q1-p3", "q1-p2", "q1-p1", "q1-p5"],
    },
    "q2": {
        "alpha": ["q2-p1", "q2-p2", "q2-p3", "q2-p4", "q2-p5"],
        "bravo": ["q2-p4", "q2-p2", "q2-p1", "q2-p3", "q2-p5"],
        "charlie": ["q2-p4", "q2-p5", "q2-p3", "q2-p2", "q2-p1"],
    },
    "q3": {
        "alpha": ["q3-p1", "q3-p5", "q3-p2", "q3-p3", "q3-p4"],
        "bravo": ["q3-p4", "q3-p1", "q3-p2", "q3-p3", "q3-p5"],
        "charlie": ["q3-p4", "q3-p3", "q3-p5", "q3-p2", "q3-p1"],
    },
}


def build_records() -> list[QueryResponseSet]:
    records = []
    for query_id in sorted(QUERIES):
        passages = []
        for pid in sorted(p for p in TEXTS if p.startswith(query_id)):
            judgments = []
            if pid in JUDGMENTS:
                judgments.append(
                    Judgment(
                        paragraphId=pid,
                        query=query_id,
                        relevance=JUDGMENTS[pid],
                        titleQuery=query_id,
                    )
                )
            rankings = []
            for method in sorted(RANKINGS[query_id]):
                order = RANKINGS[query_id][method]
                if pid in order:
                    rank = order.index(pid) + 1
                    rankings.append(
                        RankingEntry(
                            method=method,
                            paragraphId=pid,
                            queryId=query_id,
                            rank=rank,
                            score=float(100 - rank),
                        )
                    )
            passage = GradedPassage(
                paragraph_id=pid,
                text=TEXTS[pid],
                paragraph_data=ParagraphData(judgments=judgments, rankings=rankings),
            )
            passages.append(passage)
        records.append(QueryResponseSet(query_id=query_id, passages=passages))
    # an unknown field that must survive every round trip
    records[0].passages[0].__pydantic_extra__["source"] = "toy-fixture"
    return records


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    save_queries(QUERIES, OUT / "queries.json")
    write_response_file(build_records(), OUT / "responses.jsonl.gz", compress=True)
    with open(OUT / "official-leaderboard.json", "w", encoding="utf-8", newline="\n") as handle:
        handle.write('{\n  "alpha": 1,\n  "bravo": 2,\n  "charlie": 3\n}\n')
    print(f"wrote toy collection to {OUT}")


if __name__ == "__main__":
    main()
