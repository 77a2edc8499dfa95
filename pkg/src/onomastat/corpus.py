"""Lexicon and corpus ingestion, inclusion criteria, reference distributions."""

import csv
import enum
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Sequence

from .errors import (
    DataInconsistencyError,
    ParseError,
    SchemaError,
    UndefinedFractionError,
)

LEXICON_COLUMNS = (
    "record_id",
    "name_key",
    "raw_form",
    "gender",
    "region",
    "date_lo",
    "date_hi",
    "source_type",
    "fictitious",
    "excluded_reason",
)
CORPUS_COLUMNS = ("label", "name_key", "attested", "qualifier_kind")
NORMALIZATION_COLUMNS = ("raw_form", "name_key")
REFERENCE_COLUMNS = ("name_key", "count")


class Gender(str, enum.Enum):
    MALE = "male"
    FEMALE = "female"
    UNKNOWN = "unknown"


class Region(str, enum.Enum):
    PALESTINE = "palestine"
    DIASPORA = "diaspora"
    UNKNOWN = "unknown"


class SourceType(str, enum.Enum):
    OSSUARY = "ossuary"
    INSCRIPTION_PAPYRI = "inscription_papyri"
    LITERARY = "literary"


class QualifierKind(str, enum.Enum):
    DISAMBIGUATING = "disambiguating"
    TITLE = "title"


@dataclass(frozen=True)
class LexiconRecord:
    record_id: str
    name_key: str
    raw_form: str
    gender: Gender
    region: Region
    date_lo: int
    date_hi: int
    source_type: SourceType
    fictitious: bool = False
    excluded_reason: str | None = None

    def __post_init__(self):
        if not self.name_key:
            raise ValueError(f"record {self.record_id}: empty name_key")
        if self.date_lo > self.date_hi:
            raise ValueError(
                f"record {self.record_id}: date_lo {self.date_lo} > date_hi {self.date_hi}"
            )


@dataclass(frozen=True)
class InclusionCriteria:
    """Filters applied when building a reference distribution.

    Years use the astronomical convention (4 BCE is -3). A record passes the
    date test unless its whole range lies outside the window.
    """

    gender_required: Gender | None = Gender.MALE
    region_required: Region | None = Region.PALESTINE
    window_lo: int = -3
    window_hi: int = 73
    allow_fictitious: bool = False
    source_types: frozenset = frozenset(SourceType)

    def __post_init__(self):
        if self.window_lo > self.window_hi:
            raise ValueError("window_lo must not exceed window_hi")
        object.__setattr__(
            self, "source_types", frozenset(SourceType(s) for s in self.source_types)
        )

    def failing_criterion(self, rec):
        """Name of the first criterion ``rec`` fails, or None if it is included."""
        if rec.excluded_reason:
            return f"excluded: {rec.excluded_reason}"
        if self.gender_required is not None and rec.gender != self.gender_required:
            return "gender"
        if self.region_required is not None and rec.region != self.region_required:
            return "region"
        if rec.date_hi < self.window_lo or rec.date_lo > self.window_hi:
            return "date"
        if rec.fictitious and not self.allow_fictitious:
            return "fictitious"
        if rec.source_type not in self.source_types:
            return "source_type"
        return None


@dataclass(frozen=True)
class Exclusion:
    record: LexiconRecord
    reason: str


@dataclass(frozen=True)
class ReferenceDistribution:
    label: str
    counts: Mapping[str, int]
    excluded: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        clean = {}
        for name, c in self.counts.items():
            if int(c) != c or c < 1:
                raise ValueError(f"count for {name!r} must be a positive integer, got {c}")
            clean[name] = int(c)
        object.__setattr__(self, "counts", MappingProxyType(dict(sorted(clean.items()))))

    @property
    def total(self):
        return sum(self.counts.values())

    def __len__(self):
        return len(self.counts)

    def __contains__(self, name):
        return name in self.counts

    def count(self, name):
        return self.counts.get(name, 0)

    def proportion(self, name):
        total = self.total
        return self.counts.get(name, 0) / total if total else 0.0

    def ranked(self):
        """Names by descending count, ties by name_key."""
        return sorted(self.counts, key=lambda k: (-self.counts[k], k))


@dataclass(frozen=True)
class Occurrence:
    name_key: str
    attested: bool = False
    qualifier: QualifierKind | None = None


@dataclass(frozen=True)
class TestCorpus:
    __test__ = False  # not a pytest class

    label: str
    occurrences: tuple

    def __post_init__(self):
        object.__setattr__(self, "occurrences", tuple(self.occurrences))

    @classmethod
    def from_names(cls, label, names, attested=False):
        return cls(label, tuple(Occurrence(n, attested) for n in names))

    def __len__(self):
        return len(self.occurrences)

    def counts(self, contested_only=False):
        return Counter(
            o.name_key for o in self.occurrences if not (contested_only and o.attested)
        )

    @property
    def n_distinct(self):
        return len(self.counts())

    def contested(self):
        return TestCorpus(self.label, tuple(o for o in self.occurrences if not o.attested))


# -- parsing --


def _read_rows(path, columns):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in columns if c not in header]
        if missing:
            raise SchemaError(f"missing columns {missing}", path, 1)
        for row in reader:
            if None in row or any(v is None for v in row.values()):
                raise ParseError("wrong number of fields", path, reader.line_num)
            yield reader.line_num, {k: v.strip() for k, v in row.items()}


def _enum(cls, token, path, line, column):
    try:
        return cls(token.lower())
    except ValueError:
        allowed = ", ".join(m.value for m in cls)
        raise SchemaError(
            f"unknown {column} {token!r} (expected one of: {allowed})", path, line
        ) from None


def _bool(token, path, line, column):
    t = token.lower()
    if t in ("1", "true", "yes", "y", "t"):
        return True
    if t in ("0", "false", "no", "n", "f", ""):
        return False
    raise SchemaError(f"bad boolean {token!r} in column {column}", path, line)


def read_normalization(path):
    table = {}
    for line, row in _read_rows(path, NORMALIZATION_COLUMNS):
        if not row["raw_form"] or not row["name_key"]:
            raise ParseError("empty raw_form or name_key", path, line)
        prev = table.get(row["raw_form"])
        if prev is not None and prev != row["name_key"]:
            raise ParseError(
                f"raw_form {row['raw_form']!r} maps to both {prev!r} and {row['name_key']!r}",
                path,
                line,
            )
        table[row["raw_form"]] = row["name_key"]
    return table


def parse_lexicon(path, normalization=None):
    """Read a lexicon CSV into records.

    ``normalization`` maps raw_form to name_key and overrides the file's own
    name_key column; a row with neither yields a parse error.
    """
    normalization = normalization or {}
    records = []
    for line, row in _read_rows(path, LEXICON_COLUMNS):
        name_key = normalization.get(row["raw_form"], row["name_key"])
        if not name_key:
            raise ParseError(f"no name_key for raw_form {row['raw_form']!r}", path, line)
        try:
            date_lo, date_hi = int(row["date_lo"]), int(row["date_hi"])
        except ValueError:
            raise ParseError("date_lo/date_hi must be integers", path, line) from None
        if date_lo > date_hi:
            raise ParseError(f"date_lo {date_lo} > date_hi {date_hi}", path, line)
        records.append(
            LexiconRecord(
                record_id=row["record_id"],
                name_key=name_key,
                raw_form=row["raw_form"],
                gender=_enum(Gender, row["gender"], path, line, "gender"),
                region=_enum(Region, row["region"], path, line, "region"),
                date_lo=date_lo,
                date_hi=date_hi,
                source_type=_enum(SourceType, row["source_type"], path, line, "source_type"),
                fictitious=_bool(row["fictitious"], path, line, "fictitious"),
                excluded_reason=row["excluded_reason"] or None,
            )
        )
    return records


def read_corpora(path):
    """Read a corpus CSV; returns ``{label: TestCorpus}`` in file order."""
    grouped = {}
    for line, row in _read_rows(path, CORPUS_COLUMNS):
        if not row["name_key"]:
            raise ParseError("empty name_key", path, line)
        qualifier = None
        if row["qualifier_kind"]:
            qualifier = _enum(QualifierKind, row["qualifier_kind"], path, line, "qualifier_kind")
        occ = Occurrence(
            row["name_key"], _bool(row["attested"], path, line, "attested"), qualifier
        )
        grouped.setdefault(row["label"], []).append(occ)
    return {label: TestCorpus(label, tuple(occs)) for label, occs in grouped.items()}


def read_corpus(path, label=None):
    corpora = read_corpora(path)
    if label is None:
        if len(corpora) != 1:
            raise ParseError(
                f"file holds {len(corpora)} corpora {sorted(corpora)}; pass a label", path
            )
        return next(iter(corpora.values()))
    if label not in corpora:
        raise ParseError(f"no corpus labelled {label!r}", path)
    return corpora[label]


def write_corpora(corpora, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CORPUS_COLUMNS)
        for corpus in corpora:
            for o in corpus.occurrences:
                w.writerow(
                    [
                        corpus.label,
                        o.name_key,
                        "true" if o.attested else "false",
                        o.qualifier.value if o.qualifier else "",
                    ]
                )


def read_reference(path, label=None):
    counts = {}
    for line, row in _read_rows(path, REFERENCE_COLUMNS):
        try:
            c = int(row["count"])
        except ValueError:
            raise ParseError(f"bad count {row['count']!r}", path, line) from None
        if c < 1:
            raise ParseError(f"count must be positive, got {c}", path, line)
        if row["name_key"] in counts:
            raise ParseError(f"duplicate name_key {row['name_key']!r}", path, line)
        counts[row["name_key"]] = c
    return ReferenceDistribution(label or Path(path).stem, counts)


def write_reference(reference, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REFERENCE_COLUMNS)
        for name in reference.ranked():
            w.writerow([name, reference.counts[name]])


def write_exclusions(exclusions, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["record_id", "name_key", "raw_form", "date_lo", "date_hi", "reason"])
        for ex in exclusions:
            r = ex.record
            w.writerow([r.record_id, r.name_key, r.raw_form, r.date_lo, r.date_hi, ex.reason])


# -- reference construction --


def apply_criteria(records: Sequence[LexiconRecord], criteria: InclusionCriteria, label="reference"):
    """Aggregate included records by name_key; excluded ones are kept with reasons."""
    counts = Counter()
    excluded = []
    for rec in records:
        reason = criteria.failing_criterion(rec)
        if reason is None:
            counts[rec.name_key] += 1
        else:
            excluded.append(Exclusion(rec, reason))
    return ReferenceDistribution(label, dict(counts), tuple(excluded))


def included_records(records, criteria):
    return [r for r in records if criteria.failing_criterion(r) is None]


ITERATION_LABELS = {
    SourceType.OSSUARY: "ossuary",
    SourceType.INSCRIPTION_PAPYRI: "inscription_papyri",
    SourceType.LITERARY: "literary",
}


def split_iterations(records, criteria, label="reference"):
    """One reference per source type, each under ``criteria``."""
    out = {}
    for st, suffix in ITERATION_LABELS.items():
        if st in criteria.source_types:
            crit = InclusionCriteria(
                criteria.gender_required,
                criteria.region_required,
                criteria.window_lo,
                criteria.window_hi,
                criteria.allow_fictitious,
                frozenset({st}),
            )
            subset = [r for r in records if r.source_type == st]
            out[suffix] = apply_criteria(subset, crit, f"{label}-{suffix}")
        else:
            out[suffix] = ReferenceDistribution(f"{label}-{suffix}", {})
    return out


def adjusted_reference(reference: ReferenceDistribution, corpus: TestCorpus, label=None):
    """Remove the corpus's contested occurrences from the reference, then add
    one artificial occurrence per distinct corpus name."""
    counts = dict(reference.counts)
    for name, c in sorted(corpus.counts(contested_only=True).items()):
        have = counts.get(name, 0)
        if have < c:
            raise DataInconsistencyError(
                f"cannot remove {c} contested occurrence(s) of {name!r}: "
                f"reference holds {have}"
            )
        counts[name] = have - c
    for name in corpus.counts():
        counts[name] = counts.get(name, 0) + 1
    counts = {k: v for k, v in counts.items() if v > 0}
    if label is None:
        label = f"{reference.label}+adjusted({corpus.label})" if len(corpus) else reference.label
    return ReferenceDistribution(label, counts)


def rare_share(data, threshold=1, reference=None, basis=None):
    """Fraction of names whose reference count is at most ``threshold``.

    ``basis="occurrences"`` (default) weights each name by its count, the
    scale of a "% of total names" bar chart; ``basis="distinct"`` counts each
    name once. For a TestCorpus rarity is judged by ``reference`` counts,
    absent names counting as 0.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    if isinstance(data, ReferenceDistribution):
        counts = data.counts
        lookup = data
    elif isinstance(data, TestCorpus):
        if reference is None:
            raise ValueError("a reference is needed to judge rarity of corpus names")
        counts = data.counts()
        lookup = reference
    else:
        raise TypeError(f"unsupported input {type(data).__name__}")
    basis = basis or "occurrences"
    if basis not in ("distinct", "occurrences"):
        raise ValueError(f"unknown basis {basis!r}")
    if not counts:
        raise UndefinedFractionError("rare share of an empty input is undefined")
    weight = (lambda c: 1) if basis == "distinct" else (lambda c: c)
    den = sum(weight(c) for c in counts.values())
    num = sum(weight(c) for name, c in counts.items() if lookup.count(name) <= threshold)
    return num / den
