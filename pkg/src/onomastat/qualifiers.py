"""Disambiguating-qualifier counts by popularity tier of the qualified name."""

import csv
from dataclasses import dataclass
from pathlib import Path

from .corpus import QualifierKind

TOP, MID, LOW = "top", "mid", "low"


@dataclass(frozen=True)
class TierBounds:
    """A name is ``top`` at count >= top_min, ``mid`` at count >= mid_min."""

    top_min: int = 102
    mid_min: int = 6

    def __post_init__(self):
        if not 0 < self.mid_min <= self.top_min:
            raise ValueError("need 0 < mid_min <= top_min")


def tier_of(name, reference, exclude_corpus=None, bounds=TierBounds()):
    """Popularity tier of ``name``.

    With ``exclude_corpus`` the corpus's own occurrences of the name are taken
    out of the reference count first (floored at zero) so a text is not rated
    against itself.
    """
    count = reference.count(name)
    if exclude_corpus is not None:
        count = max(0, count - exclude_corpus.counts()[name])
    if count >= bounds.top_min:
        return TOP
    if count >= bounds.mid_min:
        return MID
    return LOW


@dataclass(frozen=True)
class QualifierRow:
    corpus: str
    tier_top: int
    tier_mid: int
    tier_low: int

    @property
    def total(self):
        return self.tier_top + self.tier_mid + self.tier_low


def qualifier_row(corpus, reference, bounds=TierBounds(), exclude_self=False):
    tiers = {TOP: 0, MID: 0, LOW: 0}
    for occ in corpus.occurrences:
        if occ.qualifier is QualifierKind.DISAMBIGUATING:
            tiers[tier_of(occ.name_key, reference, corpus if exclude_self else None, bounds)] += 1
    return QualifierRow(corpus.label, tiers[TOP], tiers[MID], tiers[LOW])


def qualifier_table(corpora, reference, bounds=TierBounds(), exclude_self=False):
    """One row per corpus; titles and unqualified occurrences are not counted."""
    return [qualifier_row(c, reference, bounds, exclude_self) for c in corpora]


def write_qualifier_csv(rows, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["corpus", "total", "tier_top", "tier_mid", "tier_low"])
        for r in rows:
            w.writerow([r.corpus, r.total, r.tier_top, r.tier_mid, r.tier_low])
