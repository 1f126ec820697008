#!/usr/bin/env python3
"""Builds the loader fixture files and freezes independently-computed counts.

The counts are computed by walking the JSON directly, without any of the
library's loading logic, so the loader tests have an external reference.
"""
import json

WIKIHOP = [
    {
        "id": "WH_0",
        "query": "employer juan navarro",
        "answer": "national autonomous university of mexico",
        "candidates": [
            "national autonomous university of mexico",
            "green party",
            "mexico city marathon",
            "university sports council",
        ],
        "supports": [
            "Juan Navarro is a professor of linguistics. He has taught in Mexico City since 1994.",
            "The National Autonomous University of Mexico is a public research university. It employs thousands of academics.",
        ],
    },
    {
        "id": "WH_1",
        "query": "country_of_origin tarta de santiago",
        "answer": "spain",
        "candidates": ["spain", "portugal", "france"],
        "supports": [
            "Tarta de Santiago is an almond cake. It originates from Galicia.",
            "Galicia is an autonomous community of Spain.",
        ],
    },
    {
        "id": "WH_2",
        "query": "place_of_birth ada lovelace",
        "answer": "london",
        "candidates": ["london", "paris", "vienna", "rome", "dublin"],
        "supports": [
            "Ada Lovelace was born in London in 1815. She worked with Charles Babbage.",
            "Babbage designed the Analytical Engine.",
        ],
    },
    {
        "id": "WH_3",
        "query": "instrument neko case",
        "answer": "guitar",
        "candidates": ["guitar", "drums"],
        "supports": [
            "Neko Case is a singer. She also plays guitar and tenor banjo on several records.",
        ],
    },
    {
        "id": "WH_4",
        "query": "record_label the beths",
        "answer": "carpark records",
        "candidates": [
            "carpark records",
            "flying nun records",
            "sub pop",
            "matador records",
            "merge records",
            "warp records",
        ],
        "supports": [
            "The Beths are a rock band from Auckland. The band signed to Carpark Records in 2018.",
            "Carpark Records is an independent label based in Washington.",
        ],
    },
]

# Second file: one good record, one whose answer is missing from candidates.
WIKIHOP_SKIP = [
    WIKIHOP[1],
    {
        "id": "WH_BAD",
        "query": "capital_of atlantis",
        "answer": "poseidonia",
        "candidates": ["mu", "lemuria"],
        "supports": ["Atlantis is a fictional island. Its capital is Poseidonia."],
    },
]

HOTPOT = [
    {
        "_id": "HP_0",
        "question": "In which city is the hotel company founded by the Oberoi family headquartered?",
        "answer": "Delhi",
        "type": "bridge",
        "level": "medium",
        "context": [
            [
                "Oberoi family",
                [
                    "The Oberoi family is an Indian family that is famous for its involvement in hotels.",
                    " The family runs the Oberoi Group.",
                ],
            ],
            [
                "Oberoi Group",
                [
                    "The Oberoi Group is a hotel company with its head office in Delhi.",
                    " It was founded in 1934.",
                ],
            ],
            [
                "Unrelated filler",
                ["This document talks about something else entirely."],
            ],
        ],
        "supporting_facts": [["Oberoi family", 1], ["Oberoi Group", 0]],
    },
    {
        "_id": "HP_1",
        "question": "Were Scott Derrickson and Ed Wood of the same nationality?",
        "answer": "yes",
        "type": "comparison",
        "level": "hard",
        "context": [
            ["Scott Derrickson", ["Scott Derrickson is an American director.", " He lives in Los Angeles."]],
            ["Ed Wood", ["Edward Wood was an American filmmaker."]],
        ],
        "supporting_facts": [["Scott Derrickson", 0], ["Ed Wood", 0]],
    },
    {
        "_id": "HP_2",
        "question": "What instrument does the founder of the Kronos Quartet play?",
        "answer": "violin",
        "type": "bridge",
        "level": "easy",
        "context": [
            ["Kronos Quartet", ["The Kronos Quartet was founded by David Harrington.", " It is based in San Francisco."]],
            ["David Harrington", ["David Harrington plays the violin."]],
        ],
        # The last fact points at a missing sentence index and must be dropped.
        "supporting_facts": [["Kronos Quartet", 0], ["David Harrington", 0], ["David Harrington", 9]],
    },
]

SQUAD_PARAGRAPHS = [
    {
        "context": "The Amazon rainforest covers much of the Amazon basin of South America. "
        "This basin encompasses seven million square kilometres. "
        "The majority of the forest is contained within Brazil.",
        "qas": [
            ("SQ_0", "How many square kilometres does the basin encompass?", "seven million square kilometres"),
            ("SQ_1", "Which country contains the majority of the forest?", "Brazil"),
            ("SQ_2", "What does the Amazon rainforest cover?", "much of the Amazon basin"),
        ],
    },
    {
        "context": "Normandy is a region in France. "
        "The Normans were descended from Norse raiders who swore fealty to King Charles III. "
        "Their distinct identity emerged in the first half of the 10th century.",
        "qas": [
            ("SQ_3", "In what country is Normandy located?", "France"),
            ("SQ_4", "Who did the Norse raiders swear fealty to?", "King Charles III"),
            ("SQ_5", "When did the distinct identity emerge?", "in the first half of the 10th century"),
            ("SQ_6", "From whom were the Normans descended?", "Norse raiders"),
        ],
    },
    {
        "context": "Tesla obtained around 300 patents worldwide for his inventions. "
        "Some sources claim he invented the radio. "
        "He demonstrated wireless power transfer in 1891.",
        "qas": [
            ("SQ_7", "About how many patents did Tesla obtain?", "around 300"),
            ("SQ_8", "What did Tesla demonstrate in 1891?", "wireless power transfer"),
            ("SQ_9", "What do some sources claim he invented?", "the radio"),
        ],
    },
]


def build_squad():
    articles = []
    for i, para in enumerate(SQUAD_PARAGRAPHS):
        qas = []
        for qid, question, answer in para["qas"]:
            start = para["context"].find(answer)
            assert start >= 0, f"answer {answer!r} not found in context"
            qas.append(
                {
                    "id": qid,
                    "question": question,
                    "answers": [{"text": answer, "answer_start": start}],
                }
            )
        articles.append(
            {
                "title": f"Article {i}",
                "paragraphs": [{"context": para["context"], "qas": qas}],
            }
        )
    return {"version": "1.1", "data": articles}


def main():
    with open("wikihop_fixture.json", "w") as f:
        json.dump(WIKIHOP, f, indent=1)
    with open("wikihop_skip_fixture.json", "w") as f:
        json.dump(WIKIHOP_SKIP, f, indent=1)
    with open("hotpotqa_fixture.json", "w") as f:
        json.dump(HOTPOT, f, indent=1)
    squad = build_squad()
    with open("squad_fixture.json", "w") as f:
        json.dump(squad, f, indent=1)

    # Independent walk of the raw JSON to freeze reference counts.
    counts = {
        "wikihop": {
            "num_records": len(WIKIHOP),
            "candidate_counts": {r["id"]: len(r["candidates"]) for r in WIKIHOP},
            "support_counts": {r["id"]: len(r["supports"]) for r in WIKIHOP},
        },
        "wikihop_skip": {
            "num_records": len(WIKIHOP_SKIP),
            "num_answer_in_candidates": sum(
                1 for r in WIKIHOP_SKIP if r["answer"] in r["candidates"]
            ),
        },
        "hotpotqa": {
            "num_records": len(HOTPOT),
            "supporting_fact_counts": {
                r["_id"]: sum(
                    1
                    for title, idx in r["supporting_facts"]
                    for t, sents in r["context"]
                    if t == title and idx < len(sents)
                )
                for r in HOTPOT
            },
            "document_counts": {r["_id"]: len(r["context"]) for r in HOTPOT},
            "yes_no_ids": [r["_id"] for r in HOTPOT if r["answer"] in ("yes", "no")],
        },
        "squad": {
            "num_questions": sum(
                len(p["qas"]) for a in squad["data"] for p in a["paragraphs"]
            ),
            "num_paragraphs": sum(len(a["paragraphs"]) for a in squad["data"]),
            "answers": {
                qa["id"]: qa["answers"][0]["text"]
                for a in squad["data"]
                for p in a["paragraphs"]
                for qa in p["qas"]
            },
        },
    }
    with open("fixture_counts.json", "w") as f:
        json.dump(counts, f, indent=1)
    print("fixtures written")


if __name__ == "__main__":
    main()
