import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from onomastat.corpus import ReferenceDistribution, TestCorpus
from onomastat.errors import DomainError, InfeasibleBinningError, ShapeError
from onomastat.gof import BinningSpec, chi2_statistic, gof_test, make_bins, monte_carlo_pvalue


def test_hand_layout(small_ref):
    layout = make_bins(small_ref, 100, BinningSpec(top_k=2))
    assert layout.labels == ["A", "B", "rare"]
    assert [set(b.members) for b in layout.bins] == [{"A"}, {"B"}, {"C", "D"}]
    assert layout.expected == pytest.approx([100 * 10 / 22, 100 * 10 / 22, 100 * 2 / 22])


def test_top_zero_is_rare_vs_rest(small_ref):
    layout = make_bins(small_ref, 100, BinningSpec(top_k=0))
    assert layout.labels == ["rare", "other"]
    assert set(layout.bins[1].members) == {"A", "B"}


def test_top_names_kept_on_synthetic(ilan_like):
    layout = make_bins(ilan_like, 2000, BinningSpec(top_k=12))
    assert layout.labels[:12] == ilan_like.ranked()[:12]
    assert layout.labels[12:] == ["rare", "other"]


def test_ties_broken_by_name():
    ref = ReferenceDistribution("r", {"b": 50, "a": 50, "c": 50, "z": 1})
    assert make_bins(ref, 1000, BinningSpec(top_k=2)).labels[:2] == ["a", "b"]


def test_small_n_pools_ascending(ilan_like):
    layout = make_bins(ilan_like, 53, BinningSpec(top_k=12))
    assert all(e >= 5 for e in layout.expected)
    assert sum(len(b.members) for b in layout.bins) == len(ilan_like)
    assert layout.probs.sum() == pytest.approx(1.0)


def test_pool_into_other(ilan_like):
    layout = make_bins(ilan_like, 53, BinningSpec(top_k=12, pool_policy="pool_into_other"))
    assert all(e >= 5 for e in layout.expected)
    assert any("other" in lab for lab in layout.labels)


def test_infeasible():
    ref = ReferenceDistribution("r", {"A": 1, "B": 1})
    with pytest.raises(InfeasibleBinningError):
        make_bins(ref, 6, BinningSpec(top_k=2))


def test_statistic_hand():
    assert chi2_statistic([10, 0], [5, 5]) == 10.0
    assert chi2_statistic([3, 4, 5], [3, 4, 5]) == 0.0


def test_statistic_errors():
    with pytest.raises(DomainError):
        chi2_statistic([1, 1], [2, 0])
    with pytest.raises(ShapeError):
        chi2_statistic([1, 1], [2])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 50), st.floats(0.5, 50)), min_size=2, max_size=15), st.randoms())
def test_statistic_permutation_invariant(pairs, rnd):
    shuffled = pairs[:]
    rnd.shuffle(shuffled)
    a = chi2_statistic(*zip(*pairs))
    b = chi2_statistic(*zip(*shuffled))
    assert a == pytest.approx(b, rel=1e-12)


def test_statistic_matches_scipy():
    o = [12, 30, 8, 50]
    e = [10.0, 25.0, 15.0, 50.0]
    assert chi2_statistic(o, e) == pytest.approx(stats.chisquare(o, e).statistic)


def test_exact_scaled_copy_fits_perfectly():
    ref = ReferenceDistribution("r", {"A": 40, "B": 30, "C": 20, "D": 10})
    corpus = TestCorpus.from_names("c", ["A"] * 4 + ["B"] * 3 + ["C"] * 2 + ["D"] * 1)
    res = gof_test(corpus, ref, BinningSpec(top_k=4, min_expected=0.5))
    assert res.statistic == pytest.approx(0.0, abs=1e-12)
    assert res.p_asymptotic == 1.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(["A", "B", "C", "D", "E", "Q"]), min_size=30, max_size=120))
def test_totals_preserved(names):
    ref = ReferenceDistribution("r", {"A": 40, "B": 30, "C": 20, "D": 9, "E": 1})
    res = gof_test(TestCorpus.from_names("c", names), ref, BinningSpec(top_k=3))
    assert sum(res.observed) == len(names)
    assert sum(res.expected) == pytest.approx(len(names), rel=1e-9)
    assert res.dof == len(res.labels) - 1


def test_unknown_names_land_in_rare_bin(small_ref):
    corpus = TestCorpus.from_names("c", ["A"] * 40 + ["B"] * 40 + ["Zed"] * 20)
    res = gof_test(corpus, small_ref, BinningSpec(top_k=2))
    assert dict(zip(res.labels, res.observed))["rare"] == 20


def test_p_matches_scipy_chisquare(ilan_like):
    rng = np.random.default_rng(3)
    names = ilan_like.ranked()
    p = np.array([ilan_like.counts[k] for k in names], float)
    corpus = TestCorpus.from_names("c", list(rng.choice(names, size=300, p=p / p.sum())))
    res = gof_test(corpus, ilan_like)
    ref_p = stats.chisquare(res.observed, res.expected).pvalue
    assert res.p_asymptotic == pytest.approx(ref_p, abs=1e-12)


def test_monte_carlo_bounds_and_determinism():
    probs = [0.4, 0.3, 0.2, 0.1]
    for stat in (0.0, 3.0, 1e6):
        p = monte_carlo_pvalue(stat, probs, 60, 999, seed=11)
        assert 1 / 1000 <= p <= 1.0
    assert monte_carlo_pvalue(0.0, probs, 60, 999, seed=11) == 1.0
    assert monte_carlo_pvalue(1e6, probs, 60, 999, seed=11) == 1 / 1000
    a = monte_carlo_pvalue(4.2, probs, 60, 9000, seed=1, workers=1)
    b = monte_carlo_pvalue(4.2, probs, 60, 9000, seed=1, workers=3)
    assert a == b


def test_gof_test_deterministic(ilan_like):
    corpus = TestCorpus.from_names("c", ilan_like.ranked()[:40] * 2)
    a = gof_test(corpus, ilan_like, B=3000, seed=4)
    b = gof_test(corpus, ilan_like, B=3000, seed=4, workers=2)
    assert a == b
    doc = json.loads(a.to_json())
    assert set(doc) >= {"label", "statistic", "dof", "p_asymptotic", "p_monte_carlo", "B", "seed", "bins"}
    assert doc["binning"]["top_k"] == 12


def test_seed_required_for_monte_carlo(small_ref):
    with pytest.raises(ValueError):
        gof_test(TestCorpus.from_names("c", ["A"] * 100), small_ref, BinningSpec(top_k=2), B=10)


def test_bins_csv(tmp_path, small_ref):
    corpus = TestCorpus.from_names("c", ["A"] * 45 + ["B"] * 45 + ["C"] * 10)
    res = gof_test(corpus, small_ref, BinningSpec(top_k=2))
    res.write_bins_csv(tmp_path / "b.csv")
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "bin_label,observed,expected,observed_share,expected_share"
    assert len(lines) == 4
