"""Method-validity simulator: draw corpora from known generators and measure how
often each test method rejects the historical reference."""

import configparser
import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _rng
from .binomial import binomial_cdf, binomial_interval, binomial_tail
from .corpus import Occurrence, ReferenceDistribution, TestCorpus
from .errors import DomainError
from .gof import BinningSpec, chi2_statistic, make_bins
from .intervals import historical_intervals, uniform_interval
from .special import chi2_sf

UNIFORM_PREFIX = "~u"


class Method(str, enum.Enum):
    GOF_CHI2 = "gof_chi2"
    INTERVAL_OVERLAP = "interval_overlap"
    BINOMIAL_SINGLE_NAME = "binomial_single_name"


@dataclass(frozen=True)
class Generator:
    """Per-occurrence mixture: with probability ``weight`` a name is drawn from
    the reference proportions, otherwise uniformly from ``pool``.

    Every occurrence consumes the same two uniforms whatever the weight, so
    weight 1 reproduces ``historical`` and weight 0 reproduces ``uniform``
    draw for draw under one seed.
    """

    kind: str
    reference: ReferenceDistribution | None = None
    pool: tuple = ()
    weight: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise DomainError(f"mixture weight must lie in [0, 1], got {self.weight}")
        if self.weight > 0 and (self.reference is None or len(self.reference) == 0):
            raise DomainError("historical component needs a nonempty reference")
        if self.weight < 1 and not self.pool:
            raise DomainError("uniform component needs a nonempty name pool")

    @classmethod
    def historical(cls, reference):
        return cls("historical", reference, (), 1.0)

    @classmethod
    def uniform(cls, M, names=None):
        return cls("uniform", None, _pool(M, names), 0.0)

    @classmethod
    def mixture(cls, reference, M, weight, names=None):
        return cls("mixture", reference, _pool(M, names), float(weight))

    @property
    def M(self):
        return len(self.pool)

    def describe(self):
        if self.kind == "historical":
            return f"historical({self.reference.label})"
        if self.kind == "uniform":
            return f"uniform(M={self.M})"
        return f"mixture({self.reference.label}, M={self.M}, weight={self.weight})"

    def names(self):
        """Index space of draws: reference names by rank, then the pool."""
        ref = self.reference.ranked() if self.reference is not None else []
        return ref + list(self.pool)

    def draw_indices(self, rng, size, n):
        """(size, n) array of indices into ``names()``."""
        coin = rng.random((size, n))
        u = rng.random((size, n))
        n_ref = len(self.reference) if self.reference is not None else 0
        out = np.empty((size, n), dtype=np.int64)
        take_hist = coin < self.weight
        if n_ref:
            cdf = np.cumsum([self.reference.counts[k] for k in self.reference.ranked()], dtype=float)
            cdf /= cdf[-1]
            hist_idx = np.minimum(np.searchsorted(cdf, u, side="right"), n_ref - 1)
            out[take_hist] = hist_idx[take_hist]
        if self.pool:
            unif_idx = n_ref + np.minimum((u * len(self.pool)).astype(np.int64), len(self.pool) - 1)
            out[~take_hist] = unif_idx[~take_hist]
        return out


def _pool(M, names):
    if names is not None:
        names = tuple(names)
        if M is not None and M != len(names):
            raise DomainError(f"M={M} disagrees with {len(names)} pool names")
        if not names:
            raise DomainError("uniform pool is empty")
        return names
    if M is None or M < 1 or int(M) != M:
        raise DomainError(f"uniform pool size M must be a positive integer, got {M}")
    width = len(str(M))
    return tuple(f"{UNIFORM_PREFIX}{i:0{width}d}" for i in range(1, M + 1))


def generate(generator: Generator, n, seed, label=None):
    """One corpus of n i.i.d. occurrences; deterministic given the seed."""
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = _rng.block_rng(seed, 3, 0)
    idx = generator.draw_indices(rng, 1, n)[0]
    names = generator.names()
    label = label or f"{generator.describe()} n={n} seed={seed}"
    return TestCorpus(label, tuple(Occurrence(names[i]) for i in idx))


# -- per-method decision rules, vectorized over replicate count matrices --


def overlap_threshold(n_names, level, alpha):
    """Largest tolerated number of outside names: the (1 - alpha) quantile of
    binomial(n_names, 1 - level)."""
    if n_names == 0:
        return 0
    q = 0
    while q < n_names and binomial_cdf(n_names, 1.0 - level, q) < 1.0 - alpha - 1e-12:
        q += 1
    return q


class _Decider:
    def __init__(self, method, reference, names, n, alpha, *, spec, level, name, artificial=True):
        self.method = Method(method)
        self.alpha = alpha
        self.n = n
        self.level = level
        if self.method is Method.GOF_CHI2:
            layout = make_bins(reference, n, spec)
            lookup = layout.index()
            spill = layout.catch_all_index()
            self.bin_of = np.array([lookup.get(k, spill) for k in names], dtype=np.int64)
            self.expected = layout.expected
            self.dof = len(layout.bins) - 1
        elif self.method is Method.INTERVAL_OVERLAP:
            self.artificial = artificial
            self.ref_counts = np.array([reference.count(k) for k in names], dtype=np.int64)
            self.ref_total = reference.total
            self._bounds = {}
            self._thresholds = {}
            in_ref = [k for k in names if k in reference]
            hist = historical_intervals(reference, in_ref, n, level, method="exact")
            self.lo = np.array([hist[k][0] if k in hist else 0 for k in names])
            self.hi = np.array([hist[k][1] if k in hist else 0 for k in names])
        else:
            target = name or reference.ranked()[0]
            self.col = names.index(target)
            self.p = reference.proportion(target)

    def pvalue(self, counts):
        """p-value for one replicate's count vector (gof and binomial only)."""
        if self.method is Method.GOF_CHI2:
            obs = np.bincount(self.bin_of, weights=counts, minlength=len(self.expected))
            return chi2_sf(chi2_statistic(obs, self.expected), self.dof)
        k = int(counts[self.col])
        upper = binomial_tail(self.n, self.p, k)
        lower = binomial_cdf(self.n, self.p, k)
        return min(1.0, 2.0 * min(upper, lower))

    def bounds(self, counts):
        """Per-name historical intervals for the names seen in ``counts``.

        With the artificial-occurrence adjustment each seen name gains one
        reference count, so no seen name has probability zero."""
        seen = np.nonzero(counts)[0]
        if not self.artificial:
            return seen, self.lo[seen], self.hi[seen]
        total = self.ref_total + len(seen)
        lo = np.empty(len(seen), dtype=np.int64)
        hi = np.empty(len(seen), dtype=np.int64)
        for j, i in enumerate(seen):
            key = (int(self.ref_counts[i]) + 1, total)
            if key not in self._bounds:
                self._bounds[key] = binomial_interval(self.n, key[0] / key[1], self.level)
            lo[j], hi[j] = self._bounds[key]
        return seen, lo, hi

    def reject(self, counts):
        if self.method is Method.INTERVAL_OVERLAP:
            seen, lo, hi = self.bounds(counts)
            c = counts[seen]
            outside = int(np.count_nonzero((c < lo) | (c > hi)))
            m = len(seen)
            if m not in self._thresholds:
                self._thresholds[m] = overlap_threshold(m, self.level, self.alpha)
            return outside > self._thresholds[m]
        return self.pvalue(counts) <= self.alpha


@dataclass(frozen=True)
class PowerResult:
    method: Method
    generator: str
    n: int
    alpha_level: float
    replications: int
    rejection_rate: float
    seed: int
    rule: str = ""

    @property
    def mc_se(self):
        r = self.rejection_rate
        return math.sqrt(max(r * (1 - r), 1e-12) / self.replications)

    def to_row(self):
        return {
            "method": self.method.value,
            "generator": self.generator,
            "n": self.n,
            "alpha": self.alpha_level,
            "reps": self.replications,
            "seed": self.seed,
            "rejection_rate": self.rejection_rate,
            "mc_se": self.mc_se,
            "rule": self.rule,
        }


RULES = {
    Method.GOF_CHI2: "reject when asymptotic chi-squared p <= alpha",
    Method.INTERVAL_OVERLAP: (
        "artifact-defined rule: reject when the number of observed names outside "
        "their exact historical intervals (reference plus one artificial occurrence "
        "per observed name) exceeds the (1-alpha) quantile of binomial(#names, 1-level)"
    ),
    Method.BINOMIAL_SINGLE_NAME: "reject when the two-sided exact binomial p for one name <= alpha",
}


def rejection_rate(
    method,
    generator: Generator,
    reference: ReferenceDistribution,
    n,
    alpha_level=0.05,
    reps=1000,
    seed=0,
    *,
    spec=BinningSpec(),
    level=0.95,
    name=None,
    artificial=True,
    workers=1,
):
    """Fraction of ``reps`` generated corpora on which ``method`` rejects the
    reference at ``alpha_level``.

    ``artificial`` applies, for ``interval_overlap``, the one-artificial-
    occurrence-per-observed-name adjustment before building intervals.
    """
    if not 0.0 <= alpha_level <= 1.0:
        raise DomainError("alpha_level must lie in [0, 1]")
    if reps < 1:
        raise DomainError("reps must be >= 1")
    names = generator.names()
    extra = [k for k in reference.ranked() if k not in set(names)]
    names = names + extra
    decider = _Decider(
        method, reference, names, n, alpha_level, spec=spec, level=level, name=name, artificial=artificial
    )
    width = len(names)

    def block(rng, start, size):
        idx = generator.draw_indices(rng, size, n)
        hits = 0
        for row in idx:
            hits += bool(decider.reject(np.bincount(row, minlength=width)))
        return hits

    hits = sum(_rng.map_blocks(block, reps, seed, stream=4, workers=workers))
    return PowerResult(Method(method), generator.describe(), n, alpha_level, reps, hits / reps, seed, RULES[Method(method)])


def ci_width_scaling(reference, name, sizes, level=0.95, B=20_000, seed=0, method="monte_carlo"):
    """Historical-interval width of one name at several sample sizes.

    Widths are reported in counts and as a share of the sample; the share
    shrinks like 1/sqrt(n), so ``share * sqrt(n)`` should be roughly flat.
    """
    rows = []
    for i, n in enumerate(sizes):
        (lo, hi), = historical_intervals(
            reference, [name], n, level, B, None if method == "exact" else seed + i, method=method
        ).values()
        share = (hi - lo) / n
        rows.append(
            {"n": n, "lo": lo, "hi": hi, "width": hi - lo, "width_share": share, "normalized": share * math.sqrt(n)}
        )
    base = rows[0]["width_share"]
    for r in rows:
        r["relative"] = r["width_share"] / base if base else float("nan")
    return rows


def subsample_experiment(
    corpus: TestCorpus,
    n_sub,
    reps,
    reference: ReferenceDistribution,
    method="gof_chi2",
    seed=0,
    *,
    M=None,
    level=0.95,
    alpha=0.05,
    spec=BinningSpec(),
):
    """Run ``method`` on ``reps`` subsamples (without replacement) of size n_sub.

    For ``gof_chi2`` the summary carries the p-value distribution. For
    ``interval_overlap`` it carries, per replicate, whether every observed
    name's historical interval touches the uniform band for pool size ``M``,
    plus the artifact rejection rule's outcome.
    """
    method = Method(method)
    size = len(corpus)
    if n_sub < 1 or n_sub > size:
        raise DomainError(f"n_sub must lie in [1, {size}], got {n_sub}")
    names = sorted(set(o.name_key for o in corpus.occurrences))
    names += [k for k in reference.ranked() if k not in set(names)]
    pos = {k: i for i, k in enumerate(names)}
    flat = np.array([pos[o.name_key] for o in corpus.occurrences], dtype=np.int64)
    decider = _Decider(method, reference, names, n_sub, alpha, spec=spec, level=level, name=None)
    if method is Method.INTERVAL_OVERLAP:
        if M is None:
            raise ValueError("interval_overlap needs the uniform pool size M")
        ulo, uhi = uniform_interval(M, n_sub, level)

    def block(rng, start, size_):
        out = []
        for _ in range(size_):
            pick = flat[rng.permutation(size)[:n_sub]]
            counts = np.bincount(pick, minlength=len(names))
            if method is Method.INTERVAL_OVERLAP:
                _, lo, hi = decider.bounds(counts)
                overlap = bool(np.all((lo <= uhi) & (hi >= ulo)))
                out.append((float(overlap), bool(decider.reject(counts))))
            else:
                p = decider.pvalue(counts)
                out.append((p, p <= alpha))
        return out

    results = [r for chunk in _rng.map_blocks(block, reps, seed, stream=5) for r in chunk]
    values = np.array([v for v, _ in results])
    rejected = np.array([r for _, r in results])
    summary = {
        "method": method.value,
        "n_sub": n_sub,
        "corpus_size": size,
        "reps": reps,
        "seed": seed,
        "rejection_rate": float(rejected.mean()),
    }
    if method is Method.INTERVAL_OVERLAP:
        summary.update({"M": M, "uniform_band": [ulo, uhi], "overlap_fraction": float(values.mean())})
    else:
        summary.update(
            {
                "median_p": float(np.median(values)),
                "p_quartiles": [float(q) for q in np.quantile(values, [0.25, 0.5, 0.75])],
                "p_values": values.tolist(),
            }
        )
    return summary


# -- experiment configs --


@dataclass(frozen=True)
class PowerConfig:
    name: str
    method: Method
    generator: str  # "historical", "uniform:M", "uniform-ref", "mixture:M:weight"
    n: int
    reps: int
    alpha: float
    seed: int
    extra: dict = field(default_factory=dict)

    def build_generator(self, reference):
        parts = self.generator.split(":")
        kind = parts[0]
        if kind == "historical":
            return Generator.historical(reference)
        if kind == "uniform":
            return Generator.uniform(int(parts[1]))
        if kind == "uniform-ref":
            return Generator.uniform(None, reference.ranked())
        if kind == "mixture":
            return Generator.mixture(reference, int(parts[1]), float(parts[2]))
        raise DomainError(f"unknown generator {self.generator!r}")


def read_power_configs(path):
    """INI-style file, one [section] per configuration with keys generator, n,
    reps, alpha, seed, method."""
    parser = configparser.ConfigParser()
    with Path(path).open(encoding="utf-8") as fh:
        parser.read_file(fh)
    configs = []
    for section in parser.sections():
        s = parser[section]
        try:
            configs.append(
                PowerConfig(
                    name=section,
                    method=Method(s.get("method", "gof_chi2")),
                    generator=s["generator"],
                    n=s.getint("n"),
                    reps=s.getint("reps"),
                    alpha=s.getfloat("alpha", 0.05),
                    seed=s.getint("seed"),
                    extra={k: v for k, v in s.items() if k not in {"method", "generator", "n", "reps", "alpha", "seed"}},
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"{path}: section [{section}]: {exc}") from None
    return configs


POWER_CSV_COLUMNS = ("config", "method", "generator", "n", "alpha", "reps", "seed", "rejection_rate", "mc_se", "rule")


def write_power_csv(rows, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, POWER_CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
