import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onomastat.binomial import binomial_cdf
from onomastat.corpus import ReferenceDistribution, TestCorpus
from onomastat.errors import DomainError
from onomastat.power import (
    Generator,
    Method,
    PowerConfig,
    ci_width_scaling,
    generate,
    overlap_threshold,
    read_power_configs,
    rejection_rate,
    subsample_experiment,
    write_power_csv,
)


def names_of(corpus):
    return [o.name_key for o in corpus.occurrences]


class TestGenerators:
    def test_weight_one_equals_historical(self, ilan_like):
        a = generate(Generator.historical(ilan_like), 200, seed=5)
        b = generate(Generator.mixture(ilan_like, 40, 1.0), 200, seed=5)
        assert names_of(a) == names_of(b)

    def test_weight_zero_equals_uniform(self, ilan_like):
        a = generate(Generator.uniform(40), 200, seed=5)
        b = generate(Generator.mixture(ilan_like, 40, 0.0), 200, seed=5)
        assert names_of(a) == names_of(b)

    def test_uniform_single_name(self):
        c = generate(Generator.uniform(1), 30, seed=1)
        assert len(set(names_of(c))) == 1
        assert len(c) == 30

    def test_same_seed_same_corpus(self, ilan_like):
        g = Generator.historical(ilan_like)
        assert names_of(generate(g, 50, 9)) == names_of(generate(g, 50, 9))
        assert names_of(generate(g, 50, 9)) != names_of(generate(g, 50, 10))

    def test_historical_share_converges(self, ilan_like):
        c = generate(Generator.historical(ilan_like), 10_000, seed=3)
        share = names_of(c).count("Simon") / 10_000
        assert share == pytest.approx(184 / 2185, abs=0.01)

    def test_uniform_is_roughly_flat(self):
        c = generate(Generator.uniform(10), 20_000, seed=3)
        _, counts = np.unique(names_of(c), return_counts=True)
        assert len(counts) == 10
        assert np.all(np.abs(counts / 20_000 - 0.1) < 0.01)

    def test_uniform_over_given_names(self):
        g = Generator.uniform(None, ["X", "Y"])
        assert set(names_of(generate(g, 100, 0))) == {"X", "Y"}

    @pytest.mark.parametrize("w", [-0.1, 1.5])
    def test_bad_weight(self, ilan_like, w):
        with pytest.raises(DomainError):
            Generator.mixture(ilan_like, 10, w)

    @pytest.mark.parametrize("M", [0, -3, 2.5])
    def test_bad_pool_size(self, M):
        with pytest.raises(DomainError):
            Generator.uniform(M)

    def test_bad_n(self, ilan_like):
        with pytest.raises(DomainError):
            generate(Generator.historical(ilan_like), 0, 1)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.0, 1.0), st.integers(1, 60), st.integers(0, 2**31))
    def test_draws_stay_in_name_space(self, w, n, seed):
        ref = ReferenceDistribution("r", {"A": 5, "B": 2, "C": 1})
        g = Generator.mixture(ref, 4, w)
        c = generate(g, n, seed)
        assert len(c) == n
        assert set(names_of(c)) <= set(g.names())


class TestOverlapThreshold:
    def test_is_binomial_quantile(self):
        q = overlap_threshold(40, 0.95, 0.05)
        assert binomial_cdf(40, 0.05, q) >= 0.95
        assert binomial_cdf(40, 0.05, q - 1) < 0.95

    def test_no_names(self):
        assert overlap_threshold(0, 0.95, 0.05) == 0


class TestRejectionRate:
    def test_alpha_one_always_rejects(self, ilan_like):
        r = rejection_rate("gof_chi2", Generator.historical(ilan_like), ilan_like, 60, 1.0, 50, 1)
        assert r.rejection_rate == 1.0

    def test_alpha_zero_never_rejects(self, ilan_like):
        r = rejection_rate("binomial_single_name", Generator.historical(ilan_like), ilan_like, 60, 0.0, 50, 1)
        assert r.rejection_rate == 0.0

    @pytest.mark.parametrize("method", list(Method))
    def test_monotone_in_alpha(self, ilan_like, method):
        g = Generator.mixture(ilan_like, 60, 0.5)
        rates = [rejection_rate(method, g, ilan_like, 53, a, 200, 7).rejection_rate for a in (0.01, 0.05, 0.2)]
        assert rates == sorted(rates)

    def test_worker_count_does_not_change_result(self, ilan_like):
        g = Generator.uniform(50)
        one = rejection_rate("gof_chi2", g, ilan_like, 53, 0.05, 5000, 11, workers=1)
        four = rejection_rate("gof_chi2", g, ilan_like, 53, 0.05, 5000, 11, workers=4)
        assert one == four

    def test_uniform_separates_at_53(self, ilan_like):
        hist = rejection_rate("gof_chi2", Generator.historical(ilan_like), ilan_like, 53, 0.05, 1000, 2)
        unif = rejection_rate("gof_chi2", Generator.uniform(None, ilan_like.ranked()), ilan_like, 53, 0.05, 1000, 2)
        assert unif.rejection_rate - hist.rejection_rate > 3 * math.hypot(hist.mc_se, unif.mc_se)

    def test_interval_overlap_null_is_conservative(self, ilan_like):
        r = rejection_rate("interval_overlap", Generator.historical(ilan_like), ilan_like, 53, 0.05, 500, 4)
        assert r.rejection_rate <= 0.05 + 3 * r.mc_se
        assert "artifact-defined" in r.rule

    def test_row_fields(self, ilan_like):
        row = rejection_rate("gof_chi2", Generator.historical(ilan_like), ilan_like, 53, 0.05, 20, 1).to_row()
        assert set(row) == {"method", "generator", "n", "alpha", "reps", "seed", "rejection_rate", "mc_se", "rule"}

    @pytest.mark.parametrize("kw", [{"alpha_level": 1.5}, {"reps": 0}])
    def test_bad_arguments(self, ilan_like, kw):
        args = {"alpha_level": 0.05, "reps": 10}
        args.update(kw)
        with pytest.raises(DomainError):
            rejection_rate("gof_chi2", Generator.historical(ilan_like), ilan_like, 53, seed=1, **args)

    @pytest.mark.slow
    def test_null_p_uniformity(self, ilan_like):
        r = rejection_rate("gof_chi2", Generator.historical(ilan_like), ilan_like, 100, 0.05, 10_000, 21)
        assert 0.03 <= r.rejection_rate <= 0.07


class TestCiWidthScaling:
    @pytest.mark.parametrize("method", ["exact", "monte_carlo"])
    def test_quarter_half(self, ilan_like, method):
        rows = ci_width_scaling(ilan_like, "Simon", [53, 212, 848], B=20_000, seed=1, method=method)
        rel = [r["relative"] for r in rows]
        for got, want in zip(rel, [1.0, 0.5, 0.25]):
            assert got == pytest.approx(want, rel=0.15)

    def test_intervals_contain_expectation(self, ilan_like):
        for r in ci_width_scaling(ilan_like, "Simon", [53, 212], method="exact"):
            assert r["lo"] <= r["n"] * 184 / 2185 <= r["hi"]


class TestSubsample:
    @pytest.fixture
    def corpus(self, ilan_like):
        return generate(Generator.historical(ilan_like), 120, seed=8, label="sample")

    def test_full_size_is_deterministic(self, corpus, ilan_like):
        out = subsample_experiment(corpus, len(corpus), 5, ilan_like, "gof_chi2", seed=1)
        assert len(set(out["p_values"])) == 1

    def test_too_large(self, corpus, ilan_like):
        with pytest.raises(DomainError):
            subsample_experiment(corpus, len(corpus) + 1, 5, ilan_like)

    def test_historical_subsamples_look_historical(self, corpus, ilan_like):
        out = subsample_experiment(corpus, 53, 200, ilan_like, "gof_chi2", seed=2)
        assert out["median_p"] > 0.05
        q1, q2, q3 = out["p_quartiles"]
        assert q1 <= q2 <= q3

    def test_overlap_shrinks_with_size(self, ilan_like):
        big = generate(Generator.historical(ilan_like), 600, seed=8)
        small = subsample_experiment(big, 53, 200, ilan_like, "interval_overlap", seed=3, M=40)
        full = subsample_experiment(big, 600, 20, ilan_like, "interval_overlap", seed=3, M=40)
        assert small["overlap_fraction"] > full["overlap_fraction"]

    def test_interval_overlap_needs_M(self, corpus, ilan_like):
        with pytest.raises(ValueError):
            subsample_experiment(corpus, 53, 5, ilan_like, "interval_overlap")


class TestConfigs:
    def test_read_and_build(self, tmp_path, ilan_like):
        path = tmp_path / "power.ini"
        path.write_text(
            "[null]\ngenerator = historical\nn = 53\nreps = 10\nseed = 1\n\n"
            "[mix]\ngenerator = mixture:40:0.5\nn = 53\nreps = 10\nalpha = 0.01\nseed = 2\nmethod = interval_overlap\n"
            "[flat]\ngenerator = uniform-ref\nn = 53\nreps = 10\nseed = 3\nmethod = binomial_single_name\n",
            encoding="utf-8",
        )
        null, mix, flat = read_power_configs(path)
        assert null.method is Method.GOF_CHI2 and null.alpha == 0.05
        assert mix.alpha == 0.01 and mix.method is Method.INTERVAL_OVERLAP
        assert mix.build_generator(ilan_like).weight == 0.5
        assert flat.build_generator(ilan_like).M == len(ilan_like)

    def test_missing_key(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[x]\nn = 5\nreps = 1\nseed = 1\n", encoding="utf-8")
        with pytest.raises(DomainError, match=r"\[x\]"):
            read_power_configs(path)

    def test_unknown_generator(self, ilan_like):
        cfg = PowerConfig("x", Method.GOF_CHI2, "zipf:2", 10, 1, 0.05, 0)
        with pytest.raises(DomainError):
            cfg.build_generator(ilan_like)

    def test_csv_rows(self, tmp_path, ilan_like):
        row = rejection_rate("gof_chi2", Generator.historical(ilan_like), ilan_like, 53, 0.05, 10, 1).to_row()
        path = tmp_path / "p.csv"
        write_power_csv([{"config": "a", **row}], path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("config,method,generator")
        assert len(lines) == 2


def test_corpus_type_is_not_collected():
    assert TestCorpus.__test__ is False
