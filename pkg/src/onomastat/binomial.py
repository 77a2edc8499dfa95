"""Exact binomial tail tests, multiple-testing adjustment and the rare-name count
distribution."""

import enum
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .corpus import ReferenceDistribution, TestCorpus, adjusted_reference
from .errors import DomainError, MissingNameError

#: Smallest tail probability ever reported; exact zeros are floored to this.
TAIL_FLOOR = sys.float_info.min


def _check_np(n, p):
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a nonnegative integer, got {n}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")


def binomial_logpmf(n, p, k):
    if k < 0 or k > n:
        return -math.inf
    if p == 0.0:
        return 0.0 if k == 0 else -math.inf
    if p == 1.0:
        return 0.0 if k == n else -math.inf
    return (
        math.lgamma(n + 1)
        - math.lgamma(k + 1)
        - math.lgamma(n - k + 1)
        + k * math.log(p)
        + (n - k) * math.log1p(-p)
    )


def binomial_pmf(n, p):
    """Full pmf over 0..n as a numpy array."""
    _check_np(n, p)
    return np.array([math.exp(binomial_logpmf(n, p, k)) for k in range(n + 1)])


def _sum_pmf(n, p, ks):
    return math.fsum(math.exp(binomial_logpmf(n, p, k)) for k in ks)


def binomial_tail(n, p, k):
    """P(X >= k) for X ~ Binomial(n, p)."""
    _check_np(n, p)
    if int(k) != k or k < 0 or k > n:
        raise DomainError(f"k must be an integer in [0, {n}], got {k}")
    if k == 0:
        return 1.0
    # sum the shorter side directly; the complement only when it is the smaller tail
    if k > n * p:
        return min(1.0, _sum_pmf(n, p, range(k, n + 1)))
    return max(0.0, 1.0 - _sum_pmf(n, p, range(0, k)))


def binomial_cdf(n, p, k):
    """P(X <= k)."""
    _check_np(n, p)
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    if k < n * p:
        return min(1.0, _sum_pmf(n, p, range(0, k + 1)))
    return max(0.0, 1.0 - _sum_pmf(n, p, range(k + 1, n + 1)))


def equal_tail_bounds(pmf, level):
    """Integer interval [lo, hi] with at most (1-level)/2 mass strictly below lo
    and strictly above hi, for a pmf over 0..len(pmf)-1."""
    alpha = (1.0 - level) / 2.0
    cdf = np.cumsum(pmf)
    sf = np.cumsum(pmf[::-1])[::-1]  # sf[k] = P(X >= k)
    # lo: largest k with P(X < k) <= alpha
    below = np.concatenate([[0.0], cdf[:-1]])
    lo = int(np.nonzero(below <= alpha + 1e-12)[0].max())
    # hi: smallest k with P(X > k) <= alpha
    above = np.concatenate([sf[1:], [0.0]])
    hi = int(np.nonzero(above <= alpha + 1e-12)[0].min())
    return lo, hi


def binomial_interval(n, p, level=0.95):
    return equal_tail_bounds(binomial_pmf(n, p), level)


# -- per-name tail test --


class TailMode(str, enum.Enum):
    CONTESTED_53 = "contested_53"
    FULL_82 = "full_82"
    CUSTOM = "custom"


@dataclass(frozen=True)
class TailTestResult:
    name_key: str
    k_obs: int
    n: int
    p_name: float
    tail: float
    adjusted_tail: float
    assumption_label: str

    def to_dict(self):
        return {
            "name_key": self.name_key,
            "k_obs": self.k_obs,
            "n": self.n,
            "p_name": self.p_name,
            "tail": self.tail,
            "adjusted_tail": self.adjusted_tail,
            "assumption_label": self.assumption_label,
        }


def name_tail_test(
    name,
    corpus: TestCorpus,
    reference: ReferenceDistribution,
    n_mode="contested_53",
    *,
    contested_only=None,
    n=None,
):
    """Upper-tail binomial test for over-representation of ``name``.

    Modes fix the assumptions:

    ``contested_53``
        contested occurrences only, against the reference with the corpus's
        contested names removed and one artificial occurrence per corpus name.
    ``full_82``
        every corpus occurrence against the unadjusted reference.
    ``custom``
        the reference as given; ``contested_only`` picks the corpus slice and
        ``n`` may override the sample size.
    """
    mode = TailMode(n_mode)
    if len(corpus) == 0:
        raise DomainError("corpus is empty")
    if mode is TailMode.CONTESTED_53:
        slice_ = corpus.contested()
        ref = adjusted_reference(reference, corpus)
    elif mode is TailMode.FULL_82:
        slice_ = corpus
        ref = reference
    else:
        slice_ = corpus.contested() if contested_only else corpus
        ref = reference
    if name not in ref:
        raise MissingNameError(name, ref.label)
    k_obs = slice_.counts()[name]
    n_eff = len(slice_) if n is None else int(n)
    if k_obs > n_eff:
        raise DomainError(f"k_obs {k_obs} exceeds n {n_eff}")
    p_name = ref.proportion(name)
    tail = max(binomial_tail(n_eff, p_name, k_obs), TAIL_FLOOR)
    label = f"{mode.value}: n={n_eff}, p={ref.counts[name]}/{ref.total} ({ref.label})"
    return TailTestResult(name, k_obs, n_eff, p_name, tail, tail, label)


def with_adjusted(results, method="holm"):
    """Attach multiplicity-adjusted tails to a family of TailTestResults."""
    adj = adjust([r.tail for r in results], method)
    return [
        TailTestResult(r.name_key, r.k_obs, r.n, r.p_name, r.tail, float(a), r.assumption_label)
        for r, a in zip(results, adj)
    ]


def adjust(tails, method="holm"):
    """Bonferroni or Holm step-down adjustment; returns a list in input order."""
    p = np.asarray(tails, dtype=float)
    if p.size == 0:
        return []
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise DomainError("p-values must lie in [0, 1]")
    m = p.size
    if method == "bonferroni":
        out = np.minimum(1.0, p * m)
    elif method == "holm":
        order = np.argsort(p, kind="stable")
        stepped = np.maximum.accumulate(p[order] * (m - np.arange(m)))
        out = np.empty(m)
        out[order] = np.minimum(1.0, stepped)
    else:
        raise ValueError(f"unknown adjustment method {method!r}")
    return out.tolist()


# -- rare-name count distribution --


class Sampling(str, enum.Enum):
    WITH_REPLACEMENT = "with_replacement"
    WITHOUT_REPLACEMENT = "without_replacement"


def hypergeom_pmf(N, R, n):
    """pmf over 0..n of the number of marked items in n draws without
    replacement from N items of which R are marked."""
    lc = lambda a, b: math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)
    total = lc(N, n)
    out = np.zeros(n + 1)
    for k in range(max(0, n - (N - R)), min(n, R) + 1):
        out[k] = math.exp(lc(R, k) + lc(N - R, n - k) - total)
    return out / math.fsum(out)


@dataclass(frozen=True)
class RareCountDistribution:
    pmf: np.ndarray
    N: int
    R: int
    n: int
    sampling: Sampling
    B: int = 0
    seed: int | None = None
    mc_pmf: np.ndarray | None = field(default=None, compare=False)

    @property
    def support(self):
        return np.arange(self.n + 1)

    @property
    def cdf(self):
        return np.minimum(np.cumsum(self.pmf), 1.0)

    def cdf_at(self, k):
        return float(self.cdf[k])

    def tv_distance(self):
        """Total-variation distance between exact and simulated pmfs."""
        if self.mc_pmf is None:
            raise ValueError("no Monte Carlo cross-check was run (B = 0)")
        return 0.5 * float(np.abs(self.pmf - self.mc_pmf).sum())

    def to_dict(self, thresholds=None):
        ks = range(self.n + 1) if thresholds is None else thresholds
        d = {
            "pool": {"N": self.N, "R": self.R},
            "n": self.n,
            "sampling": self.sampling.value,
            "B": self.B,
            "seed": self.seed,
            "table": [{"threshold": int(k), "cumulative": float(self.cdf[k])} for k in ks],
        }
        if self.mc_pmf is not None:
            d["tv_distance_mc"] = self.tv_distance()
        return d


def rare_count_distribution(N, R, n, sampling="without_replacement", B=0, seed=None, workers=1):
    """Distribution of the number of rare names among ``n`` draws from a pool
    of ``N`` occurrences, ``R`` of which belong to single-occurrence names."""
    sampling = Sampling(sampling)
    if not (0 <= R <= N) or N < 1:
        raise DomainError(f"need 0 <= R <= N and N >= 1, got N={N}, R={R}")
    if n < 0:
        raise DomainError("n must be nonnegative")
    if sampling is Sampling.WITHOUT_REPLACEMENT:
        if n > N:
            raise DomainError(f"cannot draw {n} without replacement from {N}")
        pmf = hypergeom_pmf(N, R, n)
    else:
        pmf = binomial_pmf(n, R / N)
    mc = None
    if B:
        if seed is None:
            raise ValueError("a seed is required for the Monte Carlo cross-check")

        def block(rng, start, size):
            if sampling is Sampling.WITHOUT_REPLACEMENT:
                draws = rng.hypergeometric(R, N - R, n, size=size) if n else np.zeros(size, int)
            else:
                draws = rng.binomial(n, R / N, size=size)
            return np.bincount(draws, minlength=n + 1)

        hist = np.sum(_rng.map_blocks(block, B, seed, stream=7, workers=workers), axis=0)
        mc = hist / B
    return RareCountDistribution(pmf, N, R, n, sampling, B, seed, mc)


def calibrate_rare_pool(N, n, targets, sampling="without_replacement"):
    """Integer R minimizing the worst absolute gap between the cdf and
    ``targets`` ({threshold: cumulative probability}).

    Returns ``(R, max_abs_gap)``.
    """
    ks = np.array(sorted(targets))
    want = np.array([targets[k] for k in ks])
    best = None
    for R in range(0, N + 1):
        cdf = rare_count_distribution(N, R, n, sampling).cdf[ks]
        gap = float(np.abs(cdf - want).max())
        if best is None or gap < best[1] - 1e-15:
            best = (R, gap)
        # cdf at fixed k decreases with R; stop once every value is below target
        if np.all(cdf < want - best[1]):
            break
    return best
