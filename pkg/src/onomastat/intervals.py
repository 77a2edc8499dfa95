"""Per-name 95% intervals under the historical reference and under a uniform
name pool, with inside/outside classification.

Interval convention: for a count distribution F, ``lo`` is the largest integer
with P(X < lo) <= (1 - level)/2 and ``hi`` the smallest with
P(X > hi) <= (1 - level)/2. The interval therefore holds at least ``level``
of the mass; discreteness makes it conservative.
"""

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _rng
from .binomial import binomial_interval, binomial_pmf, equal_tail_bounds
from .corpus import ReferenceDistribution
from .errors import DomainError, MissingNameError, ShapeError

INTERVAL_CONVENTION = (
    "equal-tail integer interval: lo = max{k: P(X<k) <= (1-level)/2}, "
    "hi = min{k: P(X>k) <= (1-level)/2}"
)


def _check_level(level):
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")


def simulate_counts(reference: ReferenceDistribution, names, n, B, seed, workers=1):
    """B x len(names) matrix of per-name counts in multinomial(n) samples from
    the reference."""
    ranked = reference.ranked()
    pos = {k: i for i, k in enumerate(ranked)}
    probs = np.array([reference.counts[k] for k in ranked], dtype=float)
    probs /= probs.sum()
    cols = np.array([pos[k] for k in names], dtype=np.int64)

    def block(rng, start, size):
        return rng.multinomial(n, probs, size=size)[:, cols]

    return np.vstack(_rng.map_blocks(block, B, seed, stream=2, workers=workers))


def historical_intervals(
    reference: ReferenceDistribution, names, n, level=0.95, B=10_000, seed=None, workers=1, method="monte_carlo"
):
    """``{name: (lo, hi)}`` for the count of each name in a sample of size n.

    ``method="monte_carlo"`` takes equal-tail quantiles of simulated counts;
    ``method="exact"`` uses the binomial(n, p_name) pmf directly.
    """
    _check_level(level)
    if n < 1:
        raise DomainError("n must be >= 1")
    names = list(names)
    for k in names:
        if k not in reference:
            raise MissingNameError(k, reference.label)
    if method == "exact":
        return {k: binomial_interval(n, reference.proportion(k), level) for k in names}
    if method != "monte_carlo":
        raise ValueError(f"unknown method {method!r}")
    if seed is None:
        raise ValueError("a seed is required for simulated intervals")
    sims = simulate_counts(reference, names, n, B, seed, workers)
    out = {}
    for j, k in enumerate(names):
        pmf = np.bincount(sims[:, j], minlength=n + 1) / B
        out[k] = equal_tail_bounds(pmf, level)
    return out


def uniform_interval(M, n, level=0.95):
    """Interval for one name's count when n names are drawn with replacement
    from M equiprobable names."""
    _check_level(level)
    if M <= 0 or int(M) != M:
        raise DomainError(f"pool size M must be a positive integer, got {M}")
    if n < 1:
        raise DomainError("n must be >= 1")
    return binomial_interval(n, 1.0 / M, level)


@dataclass(frozen=True)
class NameInterval:
    name_key: str
    observed: int
    hist_lo: int
    hist_hi: int
    unif_lo: int
    unif_hi: int

    @property
    def outside_hist(self):
        return not self.hist_lo <= self.observed <= self.hist_hi

    @property
    def outside_unif(self):
        return not self.unif_lo <= self.observed <= self.unif_hi

    @property
    def marker(self):
        """Diamond colour: white if inside both, black if inside only the
        historical interval."""
        if not self.outside_hist and not self.outside_unif:
            return "white"
        if not self.outside_hist:
            return "black"
        if not self.outside_unif:
            return "uniform-only"
        return "neither"


@dataclass(frozen=True)
class IntervalReport:
    rows: tuple
    level: float
    n: int
    B: int
    seed: int | None
    M: int | None = None
    method: str = "monte_carlo"

    @property
    def n_outside_hist(self):
        return sum(r.outside_hist for r in self.rows)

    @property
    def n_outside_unif(self):
        return sum(r.outside_unif for r in self.rows)

    def to_dict(self):
        return {
            "level": self.level,
            "n": self.n,
            "M": self.M,
            "B": self.B,
            "seed": self.seed,
            "method": self.method,
            "convention": INTERVAL_CONVENTION,
            "summary": {
                "n_names": len(self.rows),
                "n_outside_hist": self.n_outside_hist,
                "n_outside_unif": self.n_outside_unif,
            },
            "names": [
                {
                    "name_key": r.name_key,
                    "observed": r.observed,
                    "hist_lo": r.hist_lo,
                    "hist_hi": r.hist_hi,
                    "unif_lo": r.unif_lo,
                    "unif_hi": r.unif_hi,
                    "outside_hist": r.outside_hist,
                    "outside_unif": r.outside_unif,
                    "marker": r.marker,
                }
                for r in self.rows
            ],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def write_csv(self, path):
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(
                ["name", "observed", "hist_lo", "hist_hi", "unif_lo", "unif_hi", "outside_hist", "outside_unif"]
            )
            for r in self.rows:
                w.writerow(
                    [r.name_key, r.observed, r.hist_lo, r.hist_hi, r.unif_lo, r.unif_hi,
                     int(r.outside_hist), int(r.outside_unif)]
                )


def classify(observed, hist_intervals, unif_interval, *, level=0.95, n=None, B=0, seed=None, M=None, method="monte_carlo"):
    """Build an IntervalReport from aligned per-name observations and intervals.

    ``observed`` and ``hist_intervals`` are mappings keyed by name (or aligned
    sequences of (name, value) pairs); report rows follow ``observed`` order.
    """
    obs = list(observed.items()) if hasattr(observed, "items") else list(observed)
    hist = dict(hist_intervals.items() if hasattr(hist_intervals, "items") else hist_intervals)
    if len(obs) != len(hist) or any(k not in hist for k, _ in obs):
        raise ShapeError("observed counts and historical intervals cover different names")
    ulo, uhi = unif_interval
    rows = []
    for k, o in obs:
        lo, hi = hist[k]
        if lo > hi or ulo > uhi:
            raise ShapeError(f"interval for {k!r} has lo > hi")
        rows.append(NameInterval(k, int(o), int(lo), int(hi), int(ulo), int(uhi)))
    if n is None:
        n = sum(o for _, o in obs)
    return IntervalReport(tuple(rows), level, int(n), int(B), seed, M, method)


def interval_report(corpus, reference, M, level=0.95, B=10_000, seed=None, workers=1, method="monte_carlo", contested_only=True):
    """Graphical-method audit for a corpus: names ordered by reference popularity."""
    counts = corpus.counts(contested_only=contested_only)
    n = sum(counts.values())
    if n == 0:
        raise DomainError("corpus slice is empty")
    rank = {k: i for i, k in enumerate(reference.ranked())}
    missing = [k for k in counts if k not in rank]
    if missing:
        raise MissingNameError(missing[0], reference.label)
    names = sorted(counts, key=lambda k: (rank[k], k))
    hist = historical_intervals(reference, names, n, level, B, seed, workers, method)
    unif = uniform_interval(M, n, level)
    return classify(
        {k: counts[k] for k in names}, hist, unif, level=level, n=n,
        B=B if method == "monte_carlo" else 0, seed=seed, M=M, method=method,
    )


def coverage(reference, name, n, lo, hi, reps, seed):
    """Fraction of simulated samples whose count of ``name`` lies in [lo, hi]."""
    sims = simulate_counts(reference, [name], n, reps, seed)[:, 0]
    return float(np.mean((sims >= lo) & (sims <= hi)))


def exact_mass(n, p, lo, hi):
    pmf = binomial_pmf(n, p)
    return float(pmf[lo : hi + 1].sum())
