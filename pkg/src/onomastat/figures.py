"""Figures rendered from the canonical JSON reports."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed metadata keeps PNG bytes stable across runs
_SAVE_KW = {"dpi": 120, "metadata": {"Software": None}}


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def plot_gof_bins(report, path):
    """Reference shares as bars, corpus shares as a line, one point per bin."""
    bins = report["bins"]
    n = sum(b["observed"] for b in bins)
    labels = [b["bin_label"] for b in bins]
    exp = np.array([b["expected"] for b in bins]) / n * 100
    obs = np.array([b["observed"] for b in bins]) / n * 100
    x = np.arange(len(bins))
    fig, ax = plt.subplots(figsize=(max(6, 0.6 * len(bins) + 2), 4))
    ax.bar(x, exp, color="0.7", label=f"reference ({report.get('reference', '')})")
    ax.plot(x, obs, color="goldenrod", marker="o", label=report["label"])
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_ylabel("% of names")
    p = report["p_asymptotic"]
    ax.set_title(f"chi2 = {report['statistic']:.3f}, dof = {report['dof']}, p = {p:.4g}")
    ax.legend(frameon=False)
    return _finish(fig, path)


def plot_intervals(report, path):
    """Historical intervals as vertical bars, the uniform band shaded, observed
    counts as diamonds coloured by classification."""
    rows = report["names"]
    x = np.arange(len(rows))
    fig, ax = plt.subplots(figsize=(max(6, 0.35 * len(rows) + 2), 4))
    if rows:
        ax.axhspan(rows[0]["unif_lo"] - 0.5, rows[0]["unif_hi"] + 0.5, color="0.85", zorder=0)
    for i, r in enumerate(rows):
        ax.plot([i, i], [r["hist_lo"], r["hist_hi"]], color="steelblue", lw=3, zorder=1)
        face = "white" if r["marker"] == "white" else ("black" if r["marker"] == "black" else "red")
        ax.scatter([i], [r["observed"]], marker="D", s=40, facecolor=face, edgecolor="black", zorder=2)
    ax.set_xticks(x)
    ax.set_xticklabels([r["name_key"] for r in rows], rotation=90)
    ax.set_ylabel("occurrences")
    s = report["summary"]
    ax.set_title(
        f"n = {report['n']}: {s['n_outside_hist']} outside historical, "
        f"{s['n_outside_unif']} outside uniform (level {report['level']})"
    )
    return _finish(fig, path)


def plot_rare_cdf(report, path):
    table = report["table"]
    ks = [r["threshold"] for r in table]
    cdf = [100 * r["cumulative"] for r in table]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.step(ks, cdf, where="post", color="black")
    ax.set_xlabel("number of rare names (or fewer)")
    ax.set_ylabel("cumulative probability (%)")
    pool = report["pool"]
    ax.set_title(f"N = {pool['N']}, R = {pool['R']}, n = {report['n']}, {report['sampling']}")
    return _finish(fig, path)


def plot_power(rows, path):
    labels = [r["config"] for r in rows]
    rate = np.array([float(r["rejection_rate"]) for r in rows])
    se = np.array([float(r["mc_se"]) for r in rows])
    fig, ax = plt.subplots(figsize=(max(6, 0.8 * len(rows) + 2), 4))
    ax.bar(np.arange(len(rows)), rate, yerr=2 * se, color="0.6", capsize=3)
    ax.set_xticks(np.arange(len(rows)))
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_ylim(0, 1)
    ax.set_ylabel("rejection rate")
    return _finish(fig, path)


def plot_qualifiers(rows, path):
    labels = [r["corpus"] for r in rows]
    x = np.arange(len(rows))
    fig, ax = plt.subplots(figsize=(max(6, 0.8 * len(rows) + 2), 4))
    bottom = np.zeros(len(rows))
    for key, colour in (("tier_top", "0.2"), ("tier_mid", "0.55"), ("tier_low", "0.85")):
        vals = np.array([r[key] for r in rows], dtype=float)
        ax.bar(x, vals, bottom=bottom, color=colour, label=key)
        bottom += vals
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_ylabel("disambiguating qualifiers")
    ax.legend(frameon=False)
    return _finish(fig, path)
