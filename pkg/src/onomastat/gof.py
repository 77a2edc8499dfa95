"""Chi-squared goodness-of-fit of a corpus against a reference distribution."""

import csv
import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _rng
from .corpus import ReferenceDistribution, TestCorpus
from .errors import DomainError, InfeasibleBinningError, ShapeError
from .special import chi2_sf

RARE = "rare"
OTHER = "other"


class PoolPolicy(str, enum.Enum):
    POOL_INTO_OTHER = "pool_into_other"
    POOL_ASCENDING = "pool_ascending"


@dataclass(frozen=True)
class BinningSpec:
    top_k: int = 12
    rare_threshold: int = 1
    min_expected: float = 5.0
    pool_policy: PoolPolicy = PoolPolicy.POOL_ASCENDING

    def __post_init__(self):
        if self.top_k < 0:
            raise ValueError("top_k must be >= 0")
        if not self.min_expected > 0:
            raise ValueError("min_expected must be positive")
        if self.rare_threshold < 0:
            raise ValueError("rare_threshold must be >= 0")
        object.__setattr__(self, "pool_policy", PoolPolicy(self.pool_policy))

    def to_dict(self):
        return {
            "top_k": self.top_k,
            "rare_threshold": self.rare_threshold,
            "min_expected": self.min_expected,
            "pool_policy": self.pool_policy.value,
        }


@dataclass(frozen=True)
class Bin:
    label: str
    members: frozenset
    prob: float
    catch_all: bool = False  # receives corpus names absent from the reference


@dataclass(frozen=True)
class BinLayout:
    bins: tuple
    n: int
    spec: BinningSpec

    @property
    def labels(self):
        return [b.label for b in self.bins]

    @property
    def probs(self):
        return np.array([b.prob for b in self.bins])

    @property
    def expected(self):
        return self.n * self.probs

    def index(self):
        lookup = {}
        for i, b in enumerate(self.bins):
            for m in b.members:
                lookup[m] = i
        return lookup

    def catch_all_index(self):
        for i, b in enumerate(self.bins):
            if b.catch_all:
                return i
        return None

    def observed(self, counts):
        """Bin per-name counts. Names absent from the reference go to the bin
        holding the rare names."""
        lookup = self.index()
        spill = self.catch_all_index()
        out = np.zeros(len(self.bins), dtype=np.int64)
        for name, c in counts.items():
            i = lookup.get(name, spill)
            if i is None:
                raise ShapeError(f"corpus name {name!r} has no bin")
            out[i] += c
        return out


def _merge(a, b):
    return Bin(f"{a.label}+{b.label}", a.members | b.members, a.prob + b.prob, a.catch_all or b.catch_all)


def _pool_ascending(bins, n, min_expected):
    bins = list(bins)
    while len(bins) > 1:
        bins.sort(key=lambda b: (b.prob, b.label))
        if n * bins[0].prob >= min_expected:
            break
        first, second = bins[0], bins[1]
        bins = [_merge(first, second)] + bins[2:]
    return bins


def make_bins(reference: ReferenceDistribution, n, spec: BinningSpec = BinningSpec()):
    """Top-k named bins, a rare bin and an 'other' bin, pooled until every
    expected count reaches ``spec.min_expected``."""
    if len(reference) == 0:
        raise DomainError("reference is empty")
    if n < 1:
        raise DomainError("corpus size must be >= 1")
    total = reference.total
    ranked = reference.ranked()
    top = ranked[: spec.top_k]
    rest = ranked[spec.top_k :]
    rare = [k for k in rest if reference.counts[k] <= spec.rare_threshold]
    other = [k for k in rest if reference.counts[k] > spec.rare_threshold]

    def mass(names):
        return sum(reference.counts[k] for k in names) / total

    bins = [Bin(k, frozenset([k]), reference.counts[k] / total) for k in top]
    bins.append(Bin(RARE, frozenset(rare), mass(rare), catch_all=True))
    bins.append(Bin(OTHER, frozenset(other), mass(other)))
    empty_catch = not rare
    bins = [b for b in bins if b.members]
    if empty_catch:
        # keep somewhere for unseen corpus names: the least popular bin
        low = min(range(len(bins)), key=lambda i: (bins[i].prob, bins[i].label))
        b = bins[low]
        bins[low] = Bin(b.label, b.members, b.prob, catch_all=True)

    if spec.pool_policy is PoolPolicy.POOL_INTO_OTHER:
        ok = [b for b in bins if n * b.prob >= spec.min_expected or b.label == OTHER]
        short = [b for b in bins if b not in ok]
        if short:
            pooled = [b for b in ok if b.label == OTHER]
            acc = pooled[0] if pooled else None
            for b in short:
                acc = b if acc is None else _merge(acc, b)
            acc = Bin(OTHER, acc.members, acc.prob, acc.catch_all)
            bins = [b for b in ok if b.label != OTHER] + [acc]
        bins = _pool_ascending(bins, n, spec.min_expected)
    else:
        bins = _pool_ascending(bins, n, spec.min_expected)

    if len(bins) < 2 or any(n * b.prob < spec.min_expected for b in bins):
        raise InfeasibleBinningError(
            f"cannot form 2 bins with expected count >= {spec.min_expected} "
            f"at n={n} (top_k={spec.top_k})"
        )
    order = {k: i for i, k in enumerate(ranked)}

    def position(b):
        parts = b.label.split("+")
        group = 2 if OTHER in parts else (1 if RARE in parts else 0)
        return group, min(order[m] for m in b.members)

    bins.sort(key=position)
    return BinLayout(tuple(bins), n, spec)


def chi2_statistic(observed, expected):
    """Pearson statistic sum((O - E)^2 / E)."""
    o = np.asarray(observed, dtype=float)
    e = np.asarray(expected, dtype=float)
    if o.shape != e.shape:
        raise ShapeError(f"observed has shape {o.shape}, expected {e.shape}")
    if np.any(e <= 0):
        raise DomainError("expected counts must be positive")
    return float(np.sum((o - e) ** 2 / e))


def _chi2_rows(obs, expected):
    return np.sum((obs - expected) ** 2 / expected, axis=-1)


@dataclass(frozen=True)
class GofResult:
    label: str
    statistic: float
    dof: int
    p_asymptotic: float
    p_monte_carlo: float | None
    B: int
    seed: int | None
    labels: tuple
    observed: tuple
    expected: tuple
    spec: BinningSpec = field(default_factory=BinningSpec)
    reference_label: str = ""

    @property
    def bins(self):
        return [
            {"bin_label": lab, "observed": int(o), "expected": float(e)}
            for lab, o, e in zip(self.labels, self.observed, self.expected)
        ]

    def to_dict(self):
        return {
            "label": self.label,
            "reference": self.reference_label,
            "statistic": self.statistic,
            "dof": self.dof,
            "p_asymptotic": self.p_asymptotic,
            "p_monte_carlo": self.p_monte_carlo,
            "B": self.B,
            "seed": self.seed,
            "binning": self.spec.to_dict(),
            "bins": self.bins,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), indent=2, **kw)

    def write_bins_csv(self, path):
        n = sum(self.observed)
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin_label", "observed", "expected", "observed_share", "expected_share"])
            for lab, o, e in zip(self.labels, self.observed, self.expected):
                w.writerow([lab, int(o), repr(float(e)), repr(o / n), repr(e / n)])


def monte_carlo_pvalue(statistic, probs, n, B, seed, workers=1):
    """Add-one Monte Carlo p-value: (1 + #{replicate stat >= statistic}) / (B + 1),
    replicates being multinomial(n, probs) draws."""
    probs = np.asarray(probs, dtype=float)
    expected = n * probs
    # guard float noise so exact ties count as "at least as extreme"
    thresh = statistic - 1e-9 * max(1.0, abs(statistic))

    def block(rng, start, size):
        obs = rng.multinomial(n, probs, size=size)
        return int(np.count_nonzero(_chi2_rows(obs, expected) >= thresh))

    hits = sum(_rng.map_blocks(block, B, seed, stream=1, workers=workers))
    return (1 + hits) / (B + 1)


def gof_test(
    corpus: TestCorpus,
    reference: ReferenceDistribution,
    spec: BinningSpec = BinningSpec(),
    B=0,
    seed=None,
    workers=1,
    contested_only=False,
):
    """Chi-squared goodness-of-fit of ``corpus`` against ``reference``.

    Expected counts come from ``reference`` exactly as passed; callers wanting
    the artificial-occurrence adjustment pass the adjusted reference.
    """
    counts = corpus.counts(contested_only=contested_only)
    n = sum(counts.values())
    if n == 0:
        raise DomainError("corpus is empty")
    layout = make_bins(reference, n, spec)
    obs = layout.observed(counts)
    exp = layout.expected
    stat = chi2_statistic(obs, exp)
    dof = len(layout.bins) - 1
    p_asym = chi2_sf(stat, dof)
    p_mc = None
    if B:
        if seed is None:
            raise ValueError("a seed is required when B > 0")
        p_mc = monte_carlo_pvalue(stat, layout.probs, n, B, seed, workers)
    return GofResult(
        label=corpus.label,
        statistic=stat,
        dof=dof,
        p_asymptotic=p_asym,
        p_monte_carlo=p_mc,
        B=int(B),
        seed=seed,
        labels=tuple(layout.labels),
        observed=tuple(int(x) for x in obs),
        expected=tuple(float(x) for x in exp),
        spec=spec,
        reference_label=reference.label,
    )


def neg_log10(p):
    return -math.log10(p) if p > 0 else math.inf
