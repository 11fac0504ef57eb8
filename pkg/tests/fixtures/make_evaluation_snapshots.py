"""Regenerate the two evaluation snapshots: counts whose NGDs hit target distances.

Only the distances are given, so pair counts are solved
from chosen marginal counts:  fxy = hi * (m / lo) ** -d,  rounded.
Run from this directory:  python make_evaluation_snapshots.py
"""
import json
import math

M = 8_000_000_000
EVALUATIONS = {
    "first_evaluation.json": (
        "fixture:first-evaluation",
        {"rolling stones": 20_000_000, "beatles": 40_000_000, "salmonflies": 150_000},
        {("beatles", "rolling stones"): 0.23, ("beatles", "salmonflies"): 0.81,
         ("rolling stones", "salmonflies"): 1.06},
    ),
    "second_evaluation.json": (
        "fixture:second-evaluation",
        {"rolling stones": 21_500_000, "beatles": 43_000_000, "salmonflies": 140_000},
        {("beatles", "rolling stones"): 0.27, ("beatles", "salmonflies"): 0.82,
         ("rolling stones", "salmonflies"): 1.14},
    ),
}


def pair_count(fx, fy, m, d):
    lo, hi = min(fx, fy), max(fx, fy)
    return round(math.exp(math.log(hi) - d * (math.log(m) - math.log(lo))))


for name, (provider, terms, distances) in EVALUATIONS.items():
    pairs = {
        f"{a}\t{b}": pair_count(terms[a], terms[b], M, d) for (a, b), d in distances.items()
    }
    doc = {
        "version": 1,
        "provider_id": provider,
        "created_at": "2006-01-15T00:00:00+00:00",
        "m": M,
        "terms": dict(sorted(terms.items())),
        "pairs": pairs,
    }
    with open(name, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
