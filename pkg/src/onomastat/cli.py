"""Command-line front end.

Every command writes a canonical JSON report that embeds a run manifest
(argv, input file hashes, parameters, outputs, tool version). ``replay``
re-executes a report's manifest and checks the outputs are byte-identical.

Exit codes: 0 success, 2 input/schema error, 3 infeasible configuration.
"""

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .binomial import (
    calibrate_rare_pool,
    name_tail_test,
    rare_count_distribution,
    with_adjusted,
)
from .corpus import (
    InclusionCriteria,
    adjusted_reference,
    apply_criteria,
    parse_lexicon,
    read_corpora,
    read_corpus,
    read_normalization,
    read_reference,
    split_iterations,
    write_exclusions,
    write_reference,
)
from .data import data_dir
from .errors import InputError, OnomastatError
from .gof import BinningSpec, gof_test
from .intervals import interval_report
from .power import read_power_configs, rejection_rate, write_power_csv
from .qualifiers import TierBounds, qualifier_table, write_qualifier_csv

log = logging.getLogger("onomastat")

TABLE4_THRESHOLDS = range(3, 11)
TABLE4_TARGETS = {3: 0.003, 4: 0.011, 5: 0.032, 6: 0.073, 7: 0.14, 8: 0.24, 9: 0.36, 10: 0.50}


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dump_json(obj, path):
    text = json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")
    return path


class Run:
    """Collects the manifest of one command invocation."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.inputs = {}
        self.outputs = []

    def input(self, path):
        """Record an input's hash. Relative paths missing from the working
        directory are looked up under ONOMASTAT_DATA_DIR."""
        if path is None:
            return None
        if not Path(path).exists() and not Path(path).is_absolute() and data_dir() is not None:
            candidate = data_dir() / path
            if candidate.exists():
                path = str(candidate)
        self.inputs[str(path)] = _sha256(path)
        return path

    def output(self, path):
        self.outputs.append(str(path))
        return path

    def manifest(self, params):
        return {
            "command": self.args.command,
            "argv": self.argv,
            "inputs": self.inputs,
            "params": params,
            "outputs": self.outputs,
            "tool_version": __version__,
        }

    def report(self, body, params, path):
        self.output(path)
        doc = dict(body)
        doc["manifest"] = self.manifest(params)
        return dump_json(doc, path)


def _window(text):
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError("window LO must not exceed HI")
    return lo, hi


def _prefix(out, suffix):
    return Path(f"{out}{suffix}")


def _require_seed(args, why):
    if args.seed is None:
        raise InputError(f"--seed is required ({why})")


def _binning(args):
    return BinningSpec(args.top_k, args.rare_threshold, args.min_expected, args.pool_policy)


# -- commands --


def cmd_ingest(args, run):
    norm = read_normalization(run.input(args.normalization)) if args.normalization else None
    records = parse_lexicon(run.input(args.lexicon), norm)
    lo, hi = args.criteria_window
    criteria = InclusionCriteria(window_lo=lo, window_hi=hi, allow_fictitious=args.allow_fictitious)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    combined = apply_criteria(records, criteria, args.label)
    if combined.total == 0:
        log.warning("no records pass the inclusion criteria; reference is empty")
    write_reference(combined, run.output(out / f"{args.label}.csv"))
    iterations = split_iterations(records, criteria, args.label)
    for suffix, ref in iterations.items():
        write_reference(ref, run.output(out / f"{args.label}-{suffix}.csv"))
    write_exclusions(combined.excluded, run.output(out / "exclusions.csv"))
    reasons = {}
    for ex in combined.excluded:
        key = ex.reason.split(":")[0]
        reasons[key] = reasons.get(key, 0) + 1
    body = {
        "records": len(records),
        "included": combined.total,
        "distinct_names": len(combined),
        "excluded": len(combined.excluded),
        "excluded_by_reason": reasons,
        "iterations": {k: v.total for k, v in iterations.items()},
    }
    params = {"window": [lo, hi], "allow_fictitious": args.allow_fictitious, "label": args.label}
    run.report(body, params, out / "ingest.json")
    print(f"{combined.total} occurrences, {len(combined)} names; {len(combined.excluded)} excluded")


def _load_pair(args, run):
    corpus = read_corpus(run.input(args.corpus), args.label)
    reference = read_reference(run.input(args.reference))
    if getattr(args, "adjust", False):
        reference = adjusted_reference(reference, corpus)
    return corpus, reference


def cmd_test(args, run):
    if args.B:
        _require_seed(args, "Monte Carlo p-value")
    corpus, reference = _load_pair(args, run)
    res = gof_test(corpus, reference, _binning(args), args.B, args.seed, args.workers, args.contested_only)
    res.write_bins_csv(run.output(_prefix(args.out, ".bins.csv")))
    params = {
        "binning": res.spec.to_dict(),
        "B": args.B,
        "seed": args.seed,
        "contested_only": args.contested_only,
        "adjust": args.adjust,
        "alpha": args.alpha,
    }
    p = res.p_monte_carlo if res.p_monte_carlo is not None else res.p_asymptotic
    body = {"gof": res.to_dict(), "decision": {"alpha": args.alpha, "p": p, "reject": p <= args.alpha}}
    run.report(body, params, _prefix(args.out, ".json"))
    mc = f", p_mc = {res.p_monte_carlo:.4g}" if res.p_monte_carlo is not None else ""
    verdict = "reject" if p <= args.alpha else "no rejection"
    print(f"{res.label}: chi2 = {res.statistic:.4f}, dof = {res.dof}, p = {res.p_asymptotic:.4g}{mc} "
          f"({verdict} at alpha = {args.alpha})")


def cmd_intervals(args, run):
    if args.method == "monte_carlo":
        _require_seed(args, "simulated intervals")
    corpus, reference = _load_pair(args, run)
    rep = interval_report(
        corpus, reference, args.M, args.level, args.B, args.seed, args.workers, args.method,
        contested_only=not args.all_occurrences,
    )
    rep.write_csv(run.output(_prefix(args.out, ".csv")))
    params = {"M": args.M, "level": args.level, "B": args.B, "seed": args.seed, "method": args.method,
              "adjust": args.adjust, "all_occurrences": args.all_occurrences}
    run.report({"intervals": rep.to_dict()}, params, _prefix(args.out, ".json"))
    print(f"{rep.n_outside_hist} outside historical, {rep.n_outside_unif} outside uniform "
          f"({len(rep.rows)} names, n = {rep.n})")


def cmd_tail(args, run):
    corpus = read_corpus(run.input(args.corpus), args.label)
    reference = read_reference(run.input(args.reference))
    results = [
        name_tail_test(name, corpus, reference, args.mode, contested_only=args.contested_only, n=args.n)
        for name in args.name
    ]
    results = with_adjusted(results, args.adjust_method)
    out = _prefix(args.out, ".csv")
    with run.output(out).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["name_key", "k_obs", "n", "p_name", "tail", "adjusted_tail", "reject", "assumption_label"])
        for r in results:
            w.writerow([r.name_key, r.k_obs, r.n, repr(r.p_name), repr(r.tail), repr(r.adjusted_tail),
                        str(r.adjusted_tail <= args.alpha).lower(), r.assumption_label])
    params = {"mode": args.mode, "names": args.name, "adjust_method": args.adjust_method, "n": args.n,
              "alpha": args.alpha}
    run.report({"tails": [r.to_dict() for r in results]}, params, _prefix(args.out, ".json"))
    for r in results:
        print(f"{r.name_key}: P(X >= {r.k_obs}) = {r.tail:.4g} [{r.assumption_label}]; adjusted {r.adjusted_tail:.4g}")


def cmd_table4(args, run):
    if args.B:
        _require_seed(args, "Monte Carlo cross-check")
    calibration = None
    if args.pool:
        from .data import read_rare_pool

        N, R = read_rare_pool(run.input(args.pool))
        source = "pool file"
    elif args.R is not None:
        N, R = args.N, args.R
        source = "given"
    else:
        N = args.N
        R, gap = calibrate_rare_pool(N, args.n, TABLE4_TARGETS, args.sampling)
        calibration = {"max_abs_gap": gap, "targets": {str(k): v for k, v in TABLE4_TARGETS.items()}}
        source = "calibrated to the published cumulative percentages"
    dist = rare_count_distribution(N, R, args.n, args.sampling, args.B, args.seed, args.workers)
    out = _prefix(args.out, ".csv")
    with run.output(out).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["threshold", "cumulative_probability"])
        for k in TABLE4_THRESHOLDS:
            if k <= args.n:
                w.writerow([k, repr(dist.cdf_at(k))])
    body = {"rare_counts": dist.to_dict([k for k in TABLE4_THRESHOLDS if k <= args.n]),
            "pool_source": source, "calibration": calibration}
    params = {"N": N, "R": R, "n": args.n, "sampling": args.sampling, "B": args.B, "seed": args.seed}
    run.report(body, params, _prefix(args.out, ".json"))
    print(f"pool N = {N}, R = {R} ({source})")
    for k in TABLE4_THRESHOLDS:
        if k <= args.n:
            print(f"  <= {k:2d} rare: {100 * dist.cdf_at(k):5.1f}%")


def cmd_power(args, run):
    reference = read_reference(run.input(args.reference))
    configs = read_power_configs(run.input(args.config))
    rows = []
    for cfg in configs:
        gen = cfg.build_generator(reference)
        res = rejection_rate(cfg.method, gen, reference, cfg.n, cfg.alpha, cfg.reps, cfg.seed, workers=args.workers)
        row = {"config": cfg.name, **res.to_row()}
        rows.append(row)
        print(f"[{cfg.name}] {res.method.value} {res.generator} n={res.n}: "
              f"rate = {res.rejection_rate:.4f} (se {res.mc_se:.4f})")
    write_power_csv(rows, run.output(_prefix(args.out, ".csv")))
    run.report({"power": rows}, {"configs": [c.name for c in configs]}, _prefix(args.out, ".json"))


def cmd_qualifiers(args, run):
    corpora = read_corpora(run.input(args.corpus))
    reference = read_reference(run.input(args.reference))
    if args.labels:
        missing = [lab for lab in args.labels if lab not in corpora]
        if missing:
            raise InputError(f"unknown corpus labels {missing}")
        chosen = [corpora[lab] for lab in args.labels]
    else:
        chosen = list(corpora.values())
    bounds = TierBounds(args.top_min, args.mid_min)
    rows = qualifier_table(chosen, reference, bounds, args.exclude_self)
    write_qualifier_csv(rows, run.output(_prefix(args.out, ".csv")))
    body = {"qualifiers": [
        {"corpus": r.corpus, "total": r.total, "tier_top": r.tier_top, "tier_mid": r.tier_mid, "tier_low": r.tier_low}
        for r in rows
    ]}
    params = {"top_min": args.top_min, "mid_min": args.mid_min, "exclude_self": args.exclude_self}
    run.report(body, params, _prefix(args.out, ".json"))
    for r in rows:
        print(f"{r.corpus}: {r.total} ({r.tier_top}/{r.tier_mid}/{r.tier_low})")


def cmd_report(args, run):
    """Render figures (and CSV projections) from existing JSON reports."""
    from . import figures

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for path in args.reports:
        doc = json.loads(Path(run.input(path)).read_text(encoding="utf-8"))
        stem = Path(path).stem
        made = []
        if "gof" in doc:
            made.append(figures.plot_gof_bins(doc["gof"], out_dir / f"{stem}.bins.png"))
        if "intervals" in doc:
            made.append(figures.plot_intervals(doc["intervals"], out_dir / f"{stem}.intervals.png"))
        if "rare_counts" in doc:
            made.append(figures.plot_rare_cdf(doc["rare_counts"], out_dir / f"{stem}.table4.png"))
        if "power" in doc:
            made.append(figures.plot_power(doc["power"], out_dir / f"{stem}.power.png"))
        if "qualifiers" in doc:
            made.append(figures.plot_qualifiers(doc["qualifiers"], out_dir / f"{stem}.qualifiers.png"))
        if not made:
            log.warning("%s: nothing to plot", path)
        for m in made:
            run.output(m)
            print(m)


def cmd_replay(args, run):
    doc = json.loads(Path(args.report).read_text(encoding="utf-8"))
    manifest = doc.get("manifest")
    if not manifest:
        raise OnomastatError(f"{args.report} carries no manifest")
    before = {p: Path(p).read_bytes() for p in manifest["outputs"] if Path(p).exists()}
    for p, digest in manifest["inputs"].items():
        if _sha256(p) != digest:
            print(f"input changed since the original run: {p}", file=sys.stderr)
            return 1
    code = main(manifest["argv"])
    if code:
        return code
    changed = [p for p in manifest["outputs"] if before.get(p) != Path(p).read_bytes()]
    if changed:
        for p in changed:
            print(f"differs: {p}")
        return 1
    print(f"identical: {len(manifest['outputs'])} outputs")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="onomastat", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, corpus=True, reference=True):
        if corpus:
            sp.add_argument("--corpus", required=True, help="corpus CSV")
            sp.add_argument("--label", help="corpus label when the file holds several")
        if reference:
            sp.add_argument("--reference", required=True, help="reference CSV (name_key,count)")
        sp.add_argument("--out", required=True, help="output path prefix")
        sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("ingest", help="lexicon -> reference distributions")
    sp.add_argument("--lexicon", required=True)
    sp.add_argument("--normalization")
    sp.add_argument("--criteria-window", type=_window, default=(-3, 73), metavar="LO:HI")
    sp.add_argument("--allow-fictitious", action="store_true")
    sp.add_argument("--label", default="reference")
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("test", help="chi-squared goodness-of-fit")
    common(sp)
    sp.add_argument("--top-k", type=int, default=12)
    sp.add_argument("--rare-threshold", type=int, default=1)
    sp.add_argument("--min-expected", type=float, default=5.0)
    sp.add_argument("--pool-policy", choices=["pool_ascending", "pool_into_other"], default="pool_ascending")
    sp.add_argument("--B", type=int, default=0, help="Monte Carlo replications (0 = asymptotic only)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--contested-only", action="store_true")
    sp.add_argument("--adjust", action="store_true", help="artificial-occurrence adjusted reference")
    sp.add_argument("--alpha", type=float, default=0.05, help="significance level for the reported decision")
    sp.set_defaults(func=cmd_test)

    sp = sub.add_parser("intervals", help="per-name historical vs uniform intervals")
    common(sp)
    sp.add_argument("--M", type=int, required=True, help="uniform pool size")
    sp.add_argument("--level", type=float, default=0.95)
    sp.add_argument("--B", type=int, default=10_000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--method", choices=["monte_carlo", "exact"], default="monte_carlo")
    sp.add_argument("--adjust", action="store_true")
    sp.add_argument("--all-occurrences", action="store_true", help="use attested occurrences too")
    sp.set_defaults(func=cmd_intervals)

    sp = sub.add_parser("tail", help="binomial tail test for named names")
    common(sp)
    sp.add_argument("--name", action="append", required=True)
    sp.add_argument("--mode", choices=["contested_53", "full_82", "custom", "contested-53", "full-82"],
                    default="contested_53")
    sp.add_argument("--contested-only", action="store_true", help="custom mode: contested slice")
    sp.add_argument("--n", type=int, help="custom mode: sample size override")
    sp.add_argument("--adjust-method", choices=["holm", "bonferroni"], default="holm")
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.set_defaults(func=cmd_tail)

    sp = sub.add_parser("table4", help="rare-name count distribution")
    sp.add_argument("--N", type=int, default=2582)
    sp.add_argument("--R", type=int)
    sp.add_argument("--pool", help="CSV with columns N,R")
    sp.add_argument("--n", type=int, default=53)
    sp.add_argument("--sampling", choices=["without_replacement", "with_replacement"], default="without_replacement")
    sp.add_argument("--B", type=int, default=0)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", required=True)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_table4)

    sp = sub.add_parser("power", help="rejection rates from an experiment config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--reference", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_power)

    sp = sub.add_parser("qualifiers", help="qualifier counts by popularity tier")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--reference", required=True)
    sp.add_argument("--labels", nargs="*")
    sp.add_argument("--top-min", type=int, default=102)
    sp.add_argument("--mid-min", type=int, default=6)
    sp.add_argument("--exclude-self", action="store_true")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_qualifiers)

    sp = sub.add_parser("report", help="render figures from JSON reports")
    sp.add_argument("reports", nargs="+")
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("replay", help="re-run a report's manifest and compare bytes")
    sp.add_argument("report")
    sp.set_defaults(func=cmd_replay)
    return p


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "mode", None):
        args.mode = args.mode.replace("-", "_")
    run = Run(args, argv)
    try:
        rc = args.func(args, run)
    except OnomastatError as exc:
        print(f"onomastat {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, UnicodeDecodeError) as exc:
        print(f"onomastat {args.command}: {exc}", file=sys.stderr)
        return 2
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
