#!/usr/bin/env python3
"""Reference exact-match / token-F1 scorer used to freeze the metric golden file.

Mirrors the community-standard answer normalization: lowercase, drop
punctuation, drop the articles a/an/the, collapse whitespace. F1 counts
token overlap as a multiset.
"""
import collections
import json
import re
import string
import sys


def normalize(s):
    s = s.lower()
    s = "".join(ch for ch in s if ch not in set(string.punctuation))
    s = re.sub(r"\b(a|an|the)\b", " ", s)
    return " ".join(s.split())


def exact_match(pred, gold):
    return 1.0 if normalize(pred) == normalize(gold) else 0.0


def f1(pred, gold):
    pred_toks = normalize(pred).split()
    gold_toks = normalize(gold).split()
    common = collections.Counter(pred_toks) & collections.Counter(gold_toks)
    num_same = sum(common.values())
    if num_same == 0:
        return 0.0
    precision = num_same / len(pred_toks)
    recall = num_same / len(gold_toks)
    return 2 * precision * recall / (precision + recall)


CASES = [
    ("Delhi", "Delhi"),
    ("the Oberoi Group", "Oberoi Group"),
    ("Oberoi Group hotels", "Oberoi Group"),
    ("delhi", "Delhi"),
    ("Delhiized", "Delhi"),
    ("New Delhi", "Delhi"),
    ("Delhi, India", "Delhi"),
    ("an apple", "apple"),
    ("apple pie", "pie apple"),
    ("", "Delhi"),
    ("Delhi", ""),
    ("", ""),
    ("the the the", "the"),
    ("National Autonomous University of Mexico", "national autonomous university of mexico"),
    ("University of Mexico", "National Autonomous University of Mexico"),
    ("1999", "1999."),
    ("42", "forty two"),
    ("juan navarro", "Juan Navarro."),
    ("a b c d", "b c"),
    ("yes", "no"),
]


def main():
    rows = []
    for pred, gold in CASES:
        rows.append({
            "prediction": pred,
            "gold": gold,
            "em": exact_match(pred, gold),
            "f1": f1(pred, gold),
        })
    with open(sys.argv[1] if len(sys.argv) > 1 else "metric_golden.json", "w") as f:
        json.dump(rows, f, indent=1)
    print(f"wrote {len(rows)} pairs")


if __name__ == "__main__":
    main()
