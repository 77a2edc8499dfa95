"""Synthetic stand-ins for the lexicon and corpora.

The real datasets are not redistributable here. These fixtures mimic their
shape (a few very popular names, a long tail, about a tenth of occurrences on
single-occurrence names) so every pipeline can run end to end. Numbers
computed on them are not the published results.
"""

import csv
from pathlib import Path

import numpy as np

from .corpus import LEXICON_COLUMNS, ReferenceDistribution, SourceType

SYNTHETIC_TOTAL = 2185
TOP_COUNTS = {"Simon": 184, "Joseph": 170, "Eleazar": 164, "Judah": 143, "John": 123, "Hananiah": 75}


def synthetic_counts(total=SYNTHETIC_TOTAL, rare_share=0.112, decay=0.93):
    """Counts with the TOP_COUNTS head, a geometric middle and a rare tail."""
    counts = dict(TOP_COUNTS)
    rare_occ = round(total * rare_share)
    budget = total - sum(counts.values()) - rare_occ
    c = 75.0
    i = 1
    while budget > 0:
        c = max(2.0, c * decay)
        take = min(int(round(c)), budget)
        if take < 2:
            # fold a remainder of 1 into the last middle name
            last = f"name_{i - 1:03d}"
            counts[last] += take
            break
        counts[f"name_{i:03d}"] = take
        budget -= take
        i += 1
    for j in range(1, rare_occ + 1):
        counts[f"rare_{j:03d}"] = 1
    return counts


def synthetic_reference(label="synthetic-ilan-like", **kw):
    return ReferenceDistribution(label, synthetic_counts(**kw))


def write_synthetic_lexicon(path, seed=0, counts=None, n_noise=40):
    """Write a lexicon CSV whose included records reproduce ``counts`` under
    the default criteria, plus ``n_noise`` records each failing one criterion."""
    counts = counts or synthetic_counts()
    rng = np.random.default_rng(seed)
    sources = [s.value for s in SourceType]
    rows = []
    rid = 0
    for name in sorted(counts):
        for _ in range(counts[name]):
            rid += 1
            lo = int(rng.integers(-60, 60))
            # keep every span touching the default window
            hi = max(lo + int(rng.integers(0, 80)), -3)
            rows.append([f"R{rid:05d}", name, name, "male", "palestine", lo, hi,
                         sources[int(rng.integers(0, 3))], "false", ""])
    noise_kinds = ["female", "diaspora", "early", "fictitious", "flagged"]
    names = sorted(counts)
    for j in range(n_noise):
        rid += 1
        kind = noise_kinds[j % len(noise_kinds)]
        name = names[int(rng.integers(0, len(names)))]
        row = [f"R{rid:05d}", name, name, "male", "palestine", 0, 30, sources[j % 3], "false", ""]
        if kind == "female":
            row[3] = "female"
        elif kind == "diaspora":
            row[4] = "diaspora"
        elif kind == "early":
            row[5], row[6] = -120, -100
        elif kind == "fictitious":
            row[8] = "true"
        else:
            row[9] = "contextual removal"
        rows.append(row)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LEXICON_COLUMNS)
        w.writerows(rows)
    return Path(path)
