"""Command-line front end.

Every subcommand writes machine-readable reports (JSON, CSV) into ``--out``
plus a ``manifest.json`` holding the run configuration, input checksums,
tool version and a timestamp.  Reports themselves carry no timestamps, so
identical inputs and settings give byte-identical reports.

Exit codes: 0 ok, 2 usage, 3 input/parse error, 4 protocol mismatch,
5 degenerate data.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, calib, conditions, detmetrics, plots, reports, simgen, tandem
from .errors import EvalError, InputError
from .trialdata import load, parse_scores

log = logging.getLogger("asv5eval")

EXIT_OK, EXIT_USAGE, EXIT_INPUT = 0, 2, 3
DEFAULT_SLICES = "attack,group,codec,codec_quality"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration


def _build_cost_config(args) -> detmetrics.CostConfig:
    parts = (args.c_miss, args.c_fa, args.pi_spf)
    try:
        if any(v is not None for v in parts):
            if args.beta is not None:
                raise ValueError("give --beta or --c-miss/--c-fa/--pi-spf, not both")
            return detmetrics.CostConfig(c_miss=args.c_miss, c_fa=args.c_fa, pi_spf=args.pi_spf)
        return detmetrics.CostConfig(beta=args.beta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _build_sasv_config(args) -> tandem.SasvCostConfig:
    given = {k: getattr(args, k) for k in ("c_miss", "c_fa_non", "c_fa_spf", "pi_tar", "pi_non", "pi_spf")
             if getattr(args, k) is not None}
    try:
        costs = tandem.TandemCosts(**given)
        if args.weights_from_costs:
            if args.alpha is not None or args.gamma is not None:
                raise ValueError("--weights-from-costs excludes --alpha/--gamma")
            return tandem.SasvCostConfig.from_costs(costs)
        alpha = tandem.DEFAULT_ALPHA if args.alpha is None else args.alpha
        gamma = tandem.DEFAULT_GAMMA if args.gamma is None else args.gamma
        return tandem.SasvCostConfig(alpha, gamma, costs, override=True)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _asv_threshold(text):
    if text in (None, "eer"):
        return "eer"
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"--asv-threshold must be 'eer' or a number, got {text!r}") from None


def _run_config(args) -> dict:
    """Semantic settings recorded in reports (output location and format excluded)."""
    skip = {"func", "config", "out", "format", "verbose", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) in (None, [])]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"{args.command}: missing required option(s) {flags}")


def _outdir(args) -> Path:
    _need(args, "out")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _submissions(args) -> list[tuple[str, str]]:
    subs = []
    if args.scores is not None:
        subs.append(("submission", args.scores))
    for item in args.submission or []:
        ident, sep, path = item.partition("=")
        if not sep or not ident or not path:
            raise UsageError(f"--submission expects ID=PATH, got {item!r}")
        subs.append((ident, path))
    if not subs:
        raise UsageError(f"{args.command}: give --scores or at least one --submission ID=PATH")
    ids = [s for s, _ in subs]
    if len(set(ids)) != len(ids):
        raise UsageError("submission ids must be unique")
    return subs


def _emit(args, summary: str, table_header, table_rows, payload) -> None:
    if args.format == "json":
        sys.stdout.write(reports.dumps(payload))
    elif args.format == "table":
        sys.stdout.write(reports.format_table(table_header, table_rows))
    else:
        print(summary)


def _finish(args, out: Path, config: dict, inputs: dict, outputs) -> int:
    reports.write_manifest(out, args.command, config, inputs, outputs)
    return EXIT_OK


# ---------------------------------------------------------------------------
# subcommands


def cmd_track1_eval(args) -> int:
    _need(args, "scores", "keys")
    cfg = _build_cost_config(args)
    out = _outdir(args)
    joined = load(args.scores, args.keys, 1, strict=not args.permissive)
    joined.require(("bonafide", "spoof"), "track1-eval")
    report = detmetrics.evaluate_cm(joined.class_scores("bonafide"), joined.class_scores("spoof"),
                                    cfg, args.eer_method)
    inputs = reports.input_record({"scores": args.scores, "keys": args.keys})
    config = _run_config(args)
    doc = reports.header(args.command, config, inputs)
    doc.update(track=1, condition=args.condition, cost_basis=cfg.describe(), policy="all",
               trial_set_sha256=joined.checksum(), counts=joined.counts,
               metrics=report.to_dict(), warnings=list(joined.warnings))
    path = reports.write_json(out / "track1_report.json", doc)
    m = report.to_dict()
    _emit(args,
          "track1 min_dcf={min_dcf:.6f} act_dcf={act_dcf:.6f} cllr={cllr:.6f} eer={eer:.6f}".format(**m),
          ("metric", "value"), sorted(m.items()), doc)
    return _finish(args, out, config, inputs, [path])


def cmd_track2_eval(args) -> int:
    _need(args, "scores", "keys")
    cfg = _build_sasv_config(args)
    asv_thr = _asv_threshold(args.asv_threshold)
    out = _outdir(args)
    joined = load(args.scores, args.keys, 2, strict=not args.permissive)
    joined.require(("target", "nontarget", "spoof"), "track2-eval")
    tar, non, spf = (joined.class_scores(c) for c in ("target", "nontarget", "spoof"))
    value, tau = tandem.min_a_dcf(tandem.a_dcf_curve(tar, non, spf), cfg)
    details = {}
    report = tandem.SasvReport(value, tau)
    if joined.has_triplets:
        ts = tandem.TandemScores.from_arrays(joined.asv_scores, joined.cm_scores, joined.labels)
        td = tandem.t_dcf_constrained(ts, asv_thr, cfg, args.tdcf_method)
        te = tandem.t_eer(ts)
        report = tandem.SasvReport(value, tau, td.value, te.value, te.tau_asv, te.tau_cm)
        details = {
            "t_dcf": {"method": args.tdcf_method, "tau_cm": td.tau_cm, "tau_asv": td.tau_asv,
                      "asv_rates": td.asv_rates},
            "t_eer": {"rates": te.rates, "discrete_rates": te.discrete_rates},
        }
    inputs = reports.input_record({"scores": args.scores, "keys": args.keys})
    config = _run_config(args)
    doc = reports.header(args.command, config, inputs)
    doc.update(track=2, condition=args.condition, cost_basis=cfg.describe(), policy="all",
               trial_set_sha256=joined.checksum(), counts=joined.counts,
               metrics=report.to_dict(), details=details, warnings=list(joined.warnings))
    path = reports.write_json(out / "track2_report.json", doc)
    m = report.to_dict()
    summary = "track2 " + " ".join(f"{k}={m[k]:.6f}" for k in ("min_a_dcf", "t_dcf", "t_eer") if k in m)
    _emit(args, summary, ("metric", "value"), sorted(m.items()), doc)
    return _finish(args, out, config, inputs, [path])


def _logit(x, clamp_llr):
    try:
        return calib.logit_with_count(x, clamp_llr)
    except ValueError as exc:
        raise InputError(f"logit transform needs probability scores: {exc}") from None


def _read_track1_scores(path) -> tuple[list[str], np.ndarray]:
    ss = parse_scores(path, 1)
    return [r.trial for r in ss.records], np.array([r.score for r in ss.records], dtype=np.float64)


def cmd_calibrate(args) -> int:
    _need(args, "scores")
    if args.method != "logit":
        _need(args, "keys")
    out = _outdir(args)
    paths = {"scores": args.scores}
    if args.keys:
        paths["keys"] = args.keys
    if args.apply:
        paths["apply"] = args.apply
    inputs = reports.input_record(paths)
    config = _run_config(args)
    doc = reports.header(args.command, config, inputs)
    doc.update(track=1, method=args.method)

    joined = None
    if args.keys:
        joined = load(args.scores, args.keys, 1, strict=not args.permissive)
        joined.require(("bonafide", "spoof"), "calibrate")
        bona, spoof = joined.class_scores("bonafide"), joined.class_scores("spoof")
    if args.method == "logit":
        transform = lambda s: _logit(s, args.clamp_llr)  # noqa: E731
        doc["model"] = {"kind": "logit", "clamp_llr": args.clamp_llr}
    elif args.method == "affine":
        model = calib.fit_affine(bona, spoof)
        transform = lambda s: (calib.apply_affine(model, s), 0)  # noqa: E731
        doc["model"] = model.to_dict()
    else:
        model = calib.pav_calibrate(bona, spoof, args.clamp_llr)
        transform = lambda s: (model(s), 0)  # noqa: E731
        doc["model"] = model.to_dict()
    if joined is not None:
        (cb, nb), (cs, ns) = transform(bona), transform(spoof)
        doc["dev"] = {"trial_set_sha256": joined.checksum(), "counts": joined.counts,
                      "cllr_before": detmetrics.cllr(bona, spoof), "cllr_after": detmetrics.cllr(cb, cs),
                      "n_clamped": int(nb + ns)}
    outputs = []
    if args.apply:
        trials, raw = _read_track1_scores(args.apply)
        cal, n_clamped = transform(raw)
        text = "".join(f"{t} {float(s)!r}\n" for t, s in zip(trials, cal))
        target = out / "calibrated_scores.txt"
        target.write_text(text, encoding="utf-8")
        outputs.append(target)
        doc["applied"] = {"n_trials": len(trials), "n_clamped": int(n_clamped), "output": target.name}
    outputs.append(reports.write_json(out / "calibration.json", doc))
    summary = f"calibrate method={args.method}"
    if "dev" in doc:
        summary += " cllr {cllr_before:.6f} -> {cllr_after:.6f}".format(**doc["dev"])
    rows = sorted((k, v) for k, v in doc.get("dev", {}).items() if isinstance(v, float))
    _emit(args, summary, ("quantity", "value"), rows, doc)
    return _finish(args, out, config, inputs, outputs)


def cmd_ape_curve(args) -> int:
    _need(args, "scores", "keys")
    out = _outdir(args)
    joined = load(args.scores, args.keys, 1, strict=not args.permissive)
    joined.require(("bonafide", "spoof"), "ape-curve")
    bona, spoof = joined.class_scores("bonafide"), joined.class_scores("spoof")
    n_clamped = 0
    if args.transform == "logit":
        (bona, nb), (spoof, ns) = (_logit(x, args.clamp_llr) for x in (bona, spoof))
        n_clamped = nb + ns
    elif args.transform == "pav":
        mapping = calib.pav_calibrate(bona, spoof, args.clamp_llr)
        bona, spoof = mapping(bona), mapping(spoof)
    try:
        grid = calib.prior_grid(args.n_priors, args.pi_lo, args.pi_hi)
        curve = calib.ape_sweep(bona, spoof, args.c_miss, args.c_fa, grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    lo, hi = min(bona.min(), spoof.min()), max(bona.max(), spoof.max())
    saturated = (curve.tau_bayes > hi) | (curve.tau_bayes <= lo)
    csv_path = reports.write_csv(out / "ape.csv", curve.COLUMNS, curve.rows())
    inputs = reports.input_record({"scores": args.scores, "keys": args.keys})
    config = _run_config(args)
    doc = reports.header(args.command, config, inputs)
    doc.update(track=1, transform=args.transform, policy="all",
               cost_basis={"c_miss": args.c_miss, "c_fa": args.c_fa,
                           "beta": "c_miss * (1 - pi) / (c_fa * pi)"},
               trial_set_sha256=joined.checksum(), counts=joined.counts, n_clamped=int(n_clamped),
               grid={"n": int(grid.size), "lo": float(grid[0]), "hi": float(grid[-1])},
               saturated_points=int(saturated.sum()),
               saturated_at_bound=bool(np.all(curve.norm_act_dcf[saturated] == curve.dummy_bound[saturated])),
               max_gap_act_minus_min=float(np.max(curve.norm_act_dcf - curve.norm_min_dcf)),
               csv=csv_path.name)
    json_path = reports.write_json(out / "ape_summary.json", doc)
    outputs = [csv_path, json_path]
    if args.svg:
        outputs.append(out / "ape.svg")
        plots.ape_svg(curve, outputs[-1])
    summary = (f"ape-curve transform={args.transform} points={grid.size} "
               f"saturated={int(saturated.sum())} max_gap={doc['max_gap_act_minus_min']:.6f}")
    _emit(args, summary, curve.COLUMNS, curve.rows(), doc)
    return _finish(args, out, config, inputs, outputs)


def _group_map(args):
    return conditions.load_group_map(args.groups) if args.groups else None


def _slice_kinds(text: str) -> list[str]:
    kinds = [k.strip() for k in text.split(",") if k.strip()]
    bad = [k for k in kinds if k not in analysis.SLICE_KINDS]
    if bad or not kinds:
        raise UsageError(f"--slices: unknown kind(s) {bad}; choose from {analysis.SLICE_KINDS}")
    return kinds


def _cost_for_track(args, track):
    return _build_cost_config(args) if track == 1 else _build_sasv_config(args)


def cmd_breakdown(args) -> int:
    _need(args, "keys", "track")
    subs = _submissions(args)
    kinds = _slice_kinds(args.slices)
    cfg = _cost_for_track(args, args.track)
    gm = _group_map(args)
    out = _outdir(args)
    metric = analysis.primary_name(args.track)
    per_sub, overall, rows, results_json = {}, {}, [], {}
    checksums = {}
    for ident, path in subs:
        joined = load(path, args.keys, args.track, strict=not args.permissive)
        checksums[ident] = joined.checksum()
        slices = analysis.expand_slices(joined, kinds, gm)
        results = analysis.slice_metrics(joined, slices, cfg, args.policy, gm, args.eer_method,
                                         args.with_tandem)
        full = analysis.slice_metrics(joined, [analysis.Slice("all")], cfg, args.policy, gm,
                                      args.eer_method, False)[0]
        overall[ident] = analysis.primary_metric(full.report)
        per_sub[ident] = {r.slice.name: analysis.primary_metric(r.report) for r in results}
        results_json[ident] = [r.to_dict() for r in results]
        for r in results:
            for name, value in sorted(r.report.to_dict().items()):
                rows.append((ident, r.slice.name, name, value, r.n_bona, r.n_spoof, r.policy))
    csv_path = reports.write_csv(out / "breakdown.csv",
                                 ("submission", "slice", "metric", "value", "n_bona", "n_spoof", "policy"),
                                 rows)
    outputs = [csv_path]
    if len(subs) >= 2:
        cohort = analysis.top_half(overall)
        values = analysis.median_top_half(per_sub, overall, average=args.median == "average")
        quant = analysis.top_half_quantiles(per_sub, overall)
        outputs.append(reports.write_csv(
            out / "quantiles.csv", ("slice", "min", "q1", "median", "q3", "max"),
            [(n, *(q[k] for k in ("min", "q1", "median", "q3", "max"))) for n, q in quant.items()]))
    else:
        cohort = [subs[0][0]]
        values = dict(per_sub[cohort[0]])
        quant = None
    attack_values = {n.split(":", 1)[1]: v for n, v in values.items() if n.startswith("attack:")}
    groups = {}
    if attack_values and "group" in kinds:
        groups = {g: s.to_dict() for g, s in analysis.group_rollup(attack_values, gm).items()}
    if args.svg:
        cohort_vals = {n: [per_sub[s][n] for s in cohort] for n in values}
        svg = out / "breakdown.svg"
        plots.boxplot_svg(cohort_vals, svg, ylabel=metric)
        outputs.append(svg)
    paths = {"keys": args.keys, **{f"scores:{i}": p for i, p in subs}}
    if args.groups:
        paths["groups"] = args.groups
    inputs = reports.input_record(paths)
    config = _run_config(args)
    doc = reports.header(args.command, config, inputs)
    doc.update(track=args.track, condition=args.condition, policy=args.policy, metric=metric,
               cost_basis=cfg.describe(), trial_set_sha256=checksums,
               median_convention=args.median, overall=overall, cohort=cohort,
               summary=values, quantiles=quant, groups=groups, slices=results_json,
               group_map=analysis.resolve_group_map(attack_values, gm) if groups else {})
    outputs.append(reports.write_json(out / "breakdown.json", doc))
    summary = f"breakdown track={args.track} submissions={len(subs)} slices={len(values)} policy={args.policy}"
    _emit(args, summary, ("slice", metric), sorted(values.items()), doc)
    return _finish(args, out, config, inputs, outputs)


def cmd_rank(args) -> int:
    _need(args, "keys", "track")
    subs = _submissions(args)
    cfg = _cost_for_track(args, args.track)
    out = _outdir(args)
    entries = []
    for ident, path in subs:
        joined = load(path, args.keys, args.track, strict=not args.permissive)
        res = analysis.slice_metrics(joined, [analysis.Slice("all")], cfg, "pooled", None,
                                     args.eer_method, args.with_tandem)[0]
        entries.append(analysis.Submission(ident, res.report, joined.checksum()))
    board = analysis.rank(entries, args.track, args.condition)
    d = board.to_dict()
    cols = sorted({k for e in d["entries"] for k in e} - {"rank", "submission", board.metric})
    header = ("rank", "submission", board.metric, *cols)
    rows = [tuple(e.get(c, "") for c in header) for e in d["entries"]]
    csv_path = reports.write_csv(out / "leaderboard.csv", header, rows)
    inputs = reports.input_record({"keys": args.keys, **{f"scores:{i}": p for i, p in subs}})
    config = _run_config(args)
    doc = reports.header(args.command, config, inputs)
    doc.update(cost_basis=cfg.describe(), policy="all", trial_set_sha256=entries[0].checksum,
               leaderboard=d)
    json_path = reports.write_json(out / "leaderboard.json", doc)
    _emit(args, "rank " + " ".join(f"{e.rank}:{e.submission}" for e in board.entries),
          header, rows, doc)
    return _finish(args, out, config, inputs, [csv_path, json_path])


def cmd_simulate(args) -> int:
    _need(args, "track")
    out = _outdir(args)
    try:
        sim = simgen.SyntheticChallenge(track=args.track, n_bona=args.n_bona, n_spoof=args.n_spoof,
                                        d_asv=args.d_asv, seed=args.seed, scores=args.score_kind,
                                        triplets=not args.no_triplets, strength=args.strength)
        meta = sim.write(out, args.prefix)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    files = [out / meta["files"]["scores"], out / meta["files"]["keys"], out / f"{args.prefix}simulation.json"]
    counts = meta["counts"]
    print(f"simulate track={args.track} " + " ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    config = _run_config(args)
    reports.write_manifest(out, args.command, config, {}, files)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _io_options(p, scores_help="score file", with_submissions=False):
    p.add_argument("--scores", help=scores_help)
    if with_submissions:
        p.add_argument("--submission", action="append", metavar="ID=PATH",
                       help="a submission's score file; repeatable")
    p.add_argument("--keys", help="key (protocol) file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--permissive", action="store_true",
                   help="skip key trials that have no score instead of failing")
    p.add_argument("--format", choices=("summary", "json", "table"), default="summary",
                   help="what to print on stdout (files are always JSON/CSV)")


def _track1_costs(p):
    g = p.add_argument_group("Track 1 costs (give --beta or all three of c-miss/c-fa/pi-spf)")
    g.add_argument("--beta", type=float, help="DCF weight on the miss rate (default 1.9)")
    g.add_argument("--c-miss", type=float)
    g.add_argument("--c-fa", type=float)
    g.add_argument("--pi-spf", type=float)
    p.add_argument("--eer-method", choices=("rocch", "nearest"), default="rocch")


def _track2_costs(p, track1_names=False):
    g = p.add_argument_group("Track 2 costs")
    g.add_argument("--alpha", type=float, help=f"a-DCF miss weight (default {tandem.DEFAULT_ALPHA})")
    g.add_argument("--gamma", type=float, help=f"a-DCF spoof share (default {tandem.DEFAULT_GAMMA})")
    if not track1_names:
        g.add_argument("--c-miss", type=float)
        g.add_argument("--pi-spf", type=float)
    g.add_argument("--c-fa-non", type=float)
    g.add_argument("--c-fa-spf", type=float)
    g.add_argument("--pi-tar", type=float)
    g.add_argument("--pi-non", type=float)
    g.add_argument("--weights-from-costs", action="store_true",
                   help="derive alpha and gamma from the cost vector instead of the defaults")


def _condition(p):
    p.add_argument("--condition", choices=("closed", "open"), default="open",
                   help="evaluation condition label (metadata only)")


def _track(p):
    p.add_argument("--track", type=int, choices=(1, 2), help="1 = countermeasure, 2 = SASV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asv5eval", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file of option defaults (flags override it)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("track1-eval", help="countermeasure metrics: minDCF, actDCF, Cllr, EER")
    _io_options(p)
    _track1_costs(p)
    _condition(p)
    p.set_defaults(func=cmd_track1_eval)

    p = sub.add_parser("track2-eval", help="SASV metrics: min a-DCF, and t-DCF/t-EER given CM+ASV scores")
    _io_options(p)
    _track2_costs(p)
    p.add_argument("--tdcf-method", choices=("joint", "marginal"), default="joint")
    p.add_argument("--asv-threshold", default="eer", help="'eer' or a fixed ASV threshold for the t-DCF")
    _condition(p)
    p.set_defaults(func=cmd_track2_eval)

    p = sub.add_parser("calibrate", help="fit or apply score calibration (Track 1 scores)")
    _io_options(p, "development score file")
    p.add_argument("--method", choices=("affine", "pav", "logit"), default="affine",
                   help="affine: Cllr-minimising fit; pav: oracle isotonic map; logit: probability to LLR")
    p.add_argument("--apply", help="score file to transform with the fitted calibration")
    p.add_argument("--clamp-llr", type=float, default=calib.CLAMP_LLR)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("ape-curve", help="normalised actual/min DCF across a prior grid")
    _io_options(p)
    p.add_argument("--c-miss", type=float, default=1.0)
    p.add_argument("--c-fa", type=float, default=10.0)
    p.add_argument("--n-priors", type=int, default=199)
    p.add_argument("--pi-lo", type=float, default=0.001)
    p.add_argument("--pi-hi", type=float, default=0.999)
    p.add_argument("--transform", choices=("none", "logit", "pav"), default="none",
                   help="score transform applied before the sweep")
    p.add_argument("--clamp-llr", type=float, default=calib.CLAMP_LLR)
    p.add_argument("--svg", action="store_true", help="also write the curve as SVG (needs matplotlib)")
    p.set_defaults(func=cmd_ape_curve)

    for name, func, help_text in (
        ("breakdown", cmd_breakdown, "per-attack / group / codec metrics and top-half medians"),
        ("rank", cmd_rank, "leaderboard ordered by the track's primary metric"),
    ):
        p = sub.add_parser(name, help=help_text)
        _track(p)
        _io_options(p, "a single submission's score file", with_submissions=True)
        _track1_costs(p)
        _track2_costs(p, track1_names=True)
        p.add_argument("--with-tandem", action="store_true",
                       help="also compute t-DCF/t-EER (Track 2 with CM and ASV scores)")
        _condition(p)
        if name == "breakdown":
            p.add_argument("--slices", default=DEFAULT_SLICES,
                           help=f"comma list of slice kinds from {', '.join(analysis.SLICE_KINDS)}")
            p.add_argument("--policy", choices=analysis.PAIRING_POLICIES, default="pooled",
                           help="bona fide trials paired with attack/group slices")
            p.add_argument("--groups", help="JSON attack -> group map (default: built-in)")
            p.add_argument("--median", choices=("average", "lower"), default="average",
                           help="even-count median convention")
            p.add_argument("--svg", action="store_true", help="also write a box plot (needs matplotlib)")
        p.set_defaults(func=func)

    p = sub.add_parser("simulate", help="write a synthetic score/key fixture")
    _track(p)
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-bona", type=int, default=200, help="bona fide (or target/nontarget) trials per codec")
    p.add_argument("--n-spoof", type=int, default=100, help="spoof trials per attack and codec")
    p.add_argument("--d-asv", type=float, default=3.0)
    p.add_argument("--strength", type=float, default=1.0, help="scales every attack's separation")
    p.add_argument("--score-kind", choices=("llr", "probability"), default="llr")
    p.add_argument("--no-triplets", action="store_true", help="Track 2: omit CM and ASV columns")
    p.add_argument("--prefix", default="")
    p.set_defaults(func=cmd_simulate)
    return parser


def _subparsers(parser) -> dict:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return dict(action.choices)
    return {}


def _apply_config(parser, path: str) -> None:
    """Load JSON defaults: flat keys apply to every subcommand that has them,
    a nested object under a subcommand name applies to that one only."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"{path}: config file not found") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: config must be a JSON object")
    subs = _subparsers(parser)
    dests = {name: {a.dest for a in sp._actions} - {"help"} for name, sp in subs.items()}
    known = set().union(*dests.values())
    flat = {k.replace("-", "_"): v for k, v in data.items() if k not in subs}
    unknown = sorted(set(flat) - known)
    for name, section in data.items():
        if name in subs:
            section = {k.replace("-", "_"): v for k, v in section.items()}
            unknown += sorted(f"{name}.{k}" for k in set(section) - dests[name])
    if unknown:
        raise UsageError(f"{path}: unknown config option(s) {unknown}")
    for name, sp in subs.items():
        values = {k: v for k, v in flat.items() if k in dests[name]}
        values.update({k.replace("-", "_"): v for k, v in data.get(name, {}).items()})
        sp.set_defaults(**values)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("-v", "--verbose", action="store_true")
    early, _ = pre.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if early.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        if early.config:
            _apply_config(parser, early.config)
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except UsageError as exc:
        print(f"asv5eval: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EvalError as exc:
        print(f"asv5eval: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"asv5eval: {exc}", file=sys.stderr)
        return EXIT_INPUT
