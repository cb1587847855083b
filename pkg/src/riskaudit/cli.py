"""Command-line interface.

Exit codes: 0 success, 1 a verification check failed, 2 usage or
configuration error, 3 unreadable input / parse / schema error,
4 empty slice or degenerate data.
"""

import argparse
import datetime
import hashlib
import logging
import os
import sys
import warnings

import numpy as np

from . import __version__
from .exceptions import AuditError, ConfigError, EmptyCohortWarning
from .impact import PenaltyPolicy
from .ingest import DEFAULT_GROUPS, ROW_FILTERS, Schema, load_dataset, serialize_dataset
from .rates import (
    DEFAULT_CONFIDENCE,
    DEFAULT_THRESHOLD,
    ConfusionMatrix,
    group_rates,
    identity_residual,
    matrix_from_arrays,
)
from .report import (
    FIGURE_COLUMNS,
    calibration_section,
    dumps,
    effect_size_section,
    figure_rows,
    impact_section,
    metadata,
    rates_section,
    sensitivity_section,
    table_to_csv,
    write_atomic,
)
from .simulate import (
    RNG_NAME,
    SimConfig,
    analytic_delta,
    analytic_error_rates,
    generate_population,
    load_sim_config,
    monte_carlo_deltas,
)
from .subgroup import DEFAULT_BINS, parse_bins, stratified_fpr

logger = logging.getLogger("riskaudit")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_EMPTY = 4

IDENTITY_TOLERANCE = 1e-12


# ---------------------------------------------------------------- helpers


def _groups(args):
    if args.groups == "all":
        return None
    groups = tuple(g.strip() for g in args.groups.split(",") if g.strip())
    if not groups:
        raise ConfigError("--groups needs at least one label")
    return groups


def _pair(args):
    groups = _groups(args)
    if groups is None or len(groups) != 2:
        raise ConfigError("this command needs exactly two --groups (b first, then w)")
    return groups


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _load(args):
    if not args.data:
        raise ConfigError("--data is required")
    if not os.path.isfile(args.data):
        raise FileNotFoundError(f"dataset not found: {args.data}")
    schema = Schema.from_file(args.schema) if args.schema else Schema()
    with warnings.catch_warnings():
        warnings.simplefilter("error", EmptyCohortWarning)
        d = load_dataset(
            args.data, schema, skip_invalid=args.skip_invalid, groups=_groups(args), row_filters=args.row_filter
        )
    return d, schema


def _meta(args, d, schema, **extra):
    meta = metadata(
        dataset=os.path.basename(args.data),
        dataset_sha256=_sha256(args.data),
        schema=schema.to_dict(),
        threshold=args.threshold,
        groups=list(_groups(args) or []),
        confidence=args.confidence,
        row_filters=list(args.row_filter),
        n_records=len(d),
        **extra,
    )
    if not args.deterministic:
        meta["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return meta


def _emit(args, text, filename=None):
    if args.out is None:
        sys.stdout.write(text)
    elif os.path.isdir(args.out):
        write_atomic(os.path.join(args.out, filename), text)
    else:
        write_atomic(args.out, text)


def _emit_tables(args, tables):
    """Write several CSV tables: into ``--out`` as a directory, or concatenated to stdout."""
    if args.out is None:
        for name, text in tables.items():
            sys.stdout.write(f"# {name}\n{text}")
        return
    os.makedirs(args.out, exist_ok=True)
    for name, text in tables.items():
        write_atomic(os.path.join(args.out, name), text)


# ---------------------------------------------------------------- commands


def _stratified(args, d, pair):
    bins = parse_bins(args.bins) if args.bins else DEFAULT_BINS
    degree = None if args.degree == "all" else args.degree
    return stratified_fpr(d, degree, bins, args.threshold, args.confidence, groups=pair)


def build_audit(args):
    d, schema = _load(args)
    b, w = _pair(args)
    policy = PenaltyPolicy(args.t_low, args.t_high, args.threshold)
    strat = _stratified(args, d, (b, w))
    return {
        "kind": "audit",
        "metadata": _meta(args, d, schema, policy=policy.to_dict()),
        "rates": rates_section(d, (b, w), args.threshold, args.confidence),
        "threshold_sensitivity": sensitivity_section(d, (b, w), (3, 4, 5), args.confidence),
        "calibration": calibration_section(d, b, w, args.confidence, args.min_n),
        "impact": impact_section(d, policy, b, w, args.confidence),
        "effect_size": effect_size_section(d, policy, b, w),
        "stratified": strat.to_dict(),
    }


def cmd_audit(args):
    bundle = build_audit(args)
    if args.format == "json":
        _emit(args, dumps(bundle), "audit.json")
        return EXIT_OK
    tables = {}
    rows = []
    for g, r in bundle["rates"].items():
        for name in ("prevalence", "ppv", "npv", "fpr", "fnr"):
            rate = r[name]
            rows.append({"group": g, "rate": name, "value": rate["value"], "ci_low": rate["ci_low"],
                         "ci_high": rate["ci_high"], "numerator": rate["numerator"],
                         "denominator": rate["denominator"], "reason": rate["reason"]})
    tables["rates.csv"] = table_to_csv(
        ("group", "rate", "value", "ci_low", "ci_high", "numerator", "denominator", "reason"), rows)
    rows = [{"score": c["score"], "gap": c["gap"], "overlap": c["overlap"], "low_confidence": c["low_confidence"],
             "rate_b": c["rate_b"] and c["rate_b"]["value"], "rate_w": c["rate_w"] and c["rate_w"]["value"]}
            for c in bundle["calibration"]["report"]["deciles"]]
    tables["calibration.csv"] = table_to_csv(("score", "rate_b", "rate_w", "gap", "overlap", "low_confidence"), rows)
    imp = bundle["impact"]
    rows = [
        {"case": "nonrecidivators", "delta": imp["nonrecidivators"]["general"]["delta"],
         "from_error_rates": imp["nonrecidivators"]["from_error_rates"]},
        {"case": "recidivators", "delta": imp["recidivators"]["general"]["delta"],
         "from_error_rates": imp["recidivators"]["from_error_rates"]},
        {"case": "incarceration_ratio", "delta": imp["incarceration_ratio"], "from_error_rates": None},
    ]
    tables["impact.csv"] = table_to_csv(("case", "delta", "from_error_rates"), rows)
    es = bundle["effect_size"]
    rows = [dict(es["overall"])] + [dict(v) for v in es["by_outcome"].values()]
    tables["effect_size.csv"] = table_to_csv(
        ("outcome", "cohens_d", "tv_distance", "bound", "measured_delta", "bound_holds"), rows)
    rows = [{"charge_degree": c["charge_degree"], "prior_bin": c["prior_bin"], "group": c["group"], "n": c["n"],
             "negatives": c["negatives"], "fpr": c["fpr"]["value"], "ci_low": c["fpr"]["ci_low"],
             "ci_high": c["fpr"]["ci_high"], "reason": c["fpr"]["reason"]}
            for c in bundle["stratified"]["cells"]]
    tables["stratified.csv"] = table_to_csv(
        ("charge_degree", "prior_bin", "group", "n", "negatives", "fpr", "ci_low", "ci_high", "reason"), rows)
    _emit_tables(args, tables)
    return EXIT_OK


def cmd_calibration(args):
    d, schema = _load(args)
    b, w = _pair(args)
    out = {"kind": "calibration", "metadata": _meta(args, d, schema),
           **calibration_section(d, b, w, args.confidence, args.min_n)}
    if args.format == "csv":
        _emit(args, table_to_csv(FIGURE_COLUMNS, figure_rows(d, 1, b, w, args.confidence)), "calibration.csv")
    else:
        _emit(args, dumps(out), "calibration.json")
    return EXIT_OK


def cmd_impact(args):
    d, schema = _load(args)
    b, w = _pair(args)
    policy = PenaltyPolicy(args.t_low, args.t_high, args.threshold)
    pairs = [(args.y1, args.y2)] if args.y1 is not None and args.y2 is not None else ()
    out = {"kind": "impact", "metadata": _meta(args, d, schema, policy=policy.to_dict()),
           **impact_section(d, policy, b, w, args.confidence, pairs),
           "effect_size": effect_size_section(d, policy, b, w)}
    _emit(args, dumps(out), "impact.json")
    return EXIT_OK


def cmd_figures(args):
    d, schema = _load(args)
    b, w = _pair(args)
    strat = _stratified(args, d, (b, w)) if args.figure == 2 else None
    rows = figure_rows(d, args.figure, b, w, args.confidence, strat)
    if args.format == "csv":
        _emit(args, table_to_csv(FIGURE_COLUMNS, rows), f"figure{args.figure}.csv")
    else:
        _emit(args, dumps({"kind": "figure", "figure": args.figure, "metadata": _meta(args, d, schema),
                           "columns": list(FIGURE_COLUMNS), "rows": rows}), f"figure{args.figure}.json")
    if args.svg:
        from .plotting import render_figure

        render_figure(args.figure, rows, args.svg)
    return EXIT_OK


def cmd_identity_check(args):
    d, schema = _load(args)
    slices = []
    skipped = 0
    for g in d.group_labels():
        sub = d.take(d.groups == g)
        for t in range(0, 11):
            res = identity_residual(matrix_from_arrays(sub.scores, sub.outcomes, t))
            if res is None:
                skipped += 1
            else:
                slices.append({"group": g, "threshold": t, "residual": res})
    rng = np.random.Generator(np.random.PCG64(args.seed))
    random_max = 0.0
    n_random = 0
    while n_random < args.random:
        cells = rng.integers(0, args.max_count + 1, size=4)
        res = identity_residual(ConfusionMatrix(*(int(c) for c in cells)))
        if res is None:
            continue
        random_max = max(random_max, res)
        n_random += 1
    data_max = max((s["residual"] for s in slices), default=0.0)
    passed = data_max <= IDENTITY_TOLERANCE and random_max <= IDENTITY_TOLERANCE
    out = {
        "kind": "identity-check",
        "metadata": _meta(args, d, schema, seed=args.seed),
        "tolerance": IDENTITY_TOLERANCE,
        "dataset": {"slices_checked": len(slices), "slices_skipped": skipped, "max_residual": data_max,
                    "slices": slices},
        "random": {"matrices": n_random, "max_count": args.max_count, "max_residual": random_max},
        "passed": passed,
    }
    _emit(args, dumps(out), "identity-check.json")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


DEFAULT_SIM_REPS = 20


def build_simulation(raw, seed=None, reps=None, n_jobs=1):
    raw = dict(raw)
    unknown = set(raw) - {"population", "policy", "reps"}
    if unknown:
        raise ConfigError(f"unknown top-level simulation keys: {sorted(unknown)}")
    population = dict(raw.get("population", {}))
    if seed is not None:
        population["seed"] = seed
    cfg = SimConfig.from_mapping(population)
    if len(cfg.groups) != 2:
        raise ConfigError("population.groups must name exactly two groups")
    pol = raw.get("policy", {})
    if not isinstance(pol, dict) or set(pol) - {"t_low", "t_high", "threshold"}:
        raise ConfigError("policy must be an object with keys t_low, t_high, threshold")
    policy = PenaltyPolicy(**pol)
    reps = int(reps if reps is not None else raw.get("reps", DEFAULT_SIM_REPS))
    if reps < 1:
        raise ConfigError("reps must be at least 1")
    b, w = cfg.groups
    deltas = []
    pairs = ((0, 0), (1, 1), (0, 1), (1, 0))
    results = monte_carlo_deltas(cfg, policy, pairs, reps, n_jobs=n_jobs)
    for y1, y2 in pairs:
        mc = results[(y1, y2)]
        exp = analytic_delta(cfg, policy, y1, y2)
        deltas.append({"y1": y1, "y2": y2, "analytic": exp, "mc_mean": mc.mean, "mc_se": mc.se, "reps": reps,
                       "z": None if not mc.se else (mc.mean - exp) / mc.se})
    pop = generate_population(cfg)
    thresholds = []
    for t in range(0, 11):
        row = {"threshold": t}
        for g, key in ((b, "b"), (w, "w")):
            r = group_rates(pop, g, t)
            row[f"fpr_{key}"] = r.fpr.value
            row[f"fnr_{key}"] = r.fnr.value
            row[f"ppv_{key}"] = r.ppv.value
            row[f"analytic_fpr_{key}"] = analytic_error_rates(cfg, g, t)["fpr"]
        pred = row["analytic_fpr_b"] - row["analytic_fpr_w"]
        gap = row["fpr_b"] - row["fpr_w"]
        row["fpr_gap"] = gap
        row["predicted_sign"] = int(np.sign(round(pred, 12)))
        row["sign_matches"] = int(np.sign(gap)) == row["predicted_sign"]
        thresholds.append(row)
    calib = []
    for s in range(1, 11):
        cell = {"score": s, "q": cfg.q[s - 1]}
        for g, key in ((b, "b"), (w, "w")):
            mask = (pop.groups == g) & (pop.scores == s)
            n = int(mask.sum())
            cell[f"n_{key}"] = n
            cell[f"rate_{key}"] = float(pop.outcomes[mask].mean()) if n else None
        calib.append(cell)
    report = {
        "kind": "simulate",
        "metadata": metadata(rng=RNG_NAME, reps=reps),
        "config": cfg.to_dict(),
        "policy": policy.to_dict(),
        "masses": {g: list(m) for g, m in zip(cfg.groups, cfg.masses)},
        "implied_prevalence": {g: cfg.implied_prevalence(g) for g in cfg.groups},
        "delta": deltas,
        "error_rates": thresholds,
        "calibration": calib,
    }
    return report, cfg, pop


def cmd_simulate(args):
    raw = load_sim_config(args.config) if args.config else {}
    report, cfg, pop = build_simulation(raw, seed=args.seed, reps=args.reps, n_jobs=args.n_jobs)
    if args.export_data:
        write_atomic(args.export_data, serialize_dataset(pop, Schema()))
    _emit(args, dumps(report), "simulate.json")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _shared(p, data=True):
    if data:
        p.add_argument("--data", help="scored-defendant CSV file")
        p.add_argument("--schema", help="JSON file mapping record fields to CSV columns")
        p.add_argument("--groups", default=",".join(DEFAULT_GROUPS),
                       help="comma-separated group labels, b first (default: %(default)s); 'all' disables the filter")
        p.add_argument("--confidence", type=float, default=DEFAULT_CONFIDENCE)
        p.add_argument("--threshold", type=int, default=DEFAULT_THRESHOLD,
                       help="high risk iff decile > threshold (default: %(default)s)")
        p.add_argument("--skip-invalid", action="store_true", help="count and skip invalid rows instead of failing")
        p.add_argument("--row-filter", action="append", default=[], choices=sorted(ROW_FILTERS),
                       help="optional named row filter (repeatable); none applied by default")
        p.add_argument("--deterministic", action="store_true", help="omit the generated_at timestamp")
    p.add_argument("--out", help="output file or directory (default: stdout)")
    p.add_argument("--seed", type=int, default=None if not data else 0)
    p.add_argument("-v", "--verbose", action="store_true")


def _policy_flags(p):
    p.add_argument("--t-low", type=float, default=0.0)
    p.add_argument("--t-high", type=float, default=1.0)


def _strata_flags(p):
    p.add_argument("--degree", choices=("misdemeanor", "felony", "all"), default="misdemeanor")
    p.add_argument("--bins", help="prior-count bins, e.g. '0,1-3,4-6,7-10,11+'")


def build_parser():
    parser = argparse.ArgumentParser(prog="riskaudit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="full audit bundle")
    _shared(p)
    _policy_flags(p)
    _strata_flags(p)
    p.add_argument("--min-n", type=int, default=10)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("calibration", help="per-decile calibration curves and comparison")
    _shared(p)
    p.add_argument("--min-n", type=int, default=10)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_calibration)

    p = sub.add_parser("impact", help="disparate impact of the MinMax policy")
    _shared(p)
    _policy_flags(p)
    p.add_argument("--y1", type=int, choices=(0, 1))
    p.add_argument("--y2", type=int, choices=(0, 1))
    p.add_argument("--format", choices=("json",), default="json")
    p.set_defaults(func=cmd_impact)

    p = sub.add_parser("figures", help="tidy data tables for figures 1-3")
    _shared(p)
    _strata_flags(p)
    p.add_argument("--figure", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.add_argument("--svg", help="also render an SVG to this path")
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("identity-check", help="check the FPR identity on every slice and on random matrices")
    _shared(p)
    p.add_argument("--random", type=int, default=10_000, help="number of random confusion matrices")
    p.add_argument("--max-count", type=int, default=1000, help="largest random cell count")
    p.add_argument("--format", choices=("json",), default="json")
    p.set_defaults(func=cmd_identity_check)

    p = sub.add_parser("simulate", help="Monte Carlo check on a calibrated synthetic population")
    p.add_argument("--config", help="JSON simulation config (defaults used when omitted)")
    _shared(p, data=False)
    p.add_argument("--reps", type=int)
    p.add_argument("--n-jobs", type=int, default=1)
    p.add_argument("--export-data", help="write the seed population as CSV in the default ingest schema")
    p.add_argument("--format", choices=("json",), default="json")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"riskaudit: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AuditError as exc:
        print(f"riskaudit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except EmptyCohortWarning as exc:
        print(f"riskaudit: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except OSError as exc:
        print(f"riskaudit: cannot read input: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
