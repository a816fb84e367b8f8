#!/usr/bin/env python3
"""Command-line front end for shiftscan.

Usage:
  shiftctl detect    --input CSV [--kind count] [--method exhaustive] [--model poisson] ...
  shiftctl critvals  [--n 2000] [--reps 100000] [--levels 0.9,0.95] [--seed 0]
  shiftctl simulate  --n N [--model gauss-iid] [--taus 26] [--deltas 0,2] ...
  shiftctl diff      --target CSV --reference CSV
  shiftctl adjust    --input CSV (--taus LIST | --report JSON) [--anchor last-regime]
  shiftctl validate  --config shiftscan.yml

Changepoint convention: a changepoint at index tau is the last observation of
its regime; the mean shifts after tau. Reports give both the index and the
time label. SHIFTSCAN_THREADS caps worker threads.

Exit codes: 0 report produced, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import pathlib
import sys
import time

from shiftscan.config import load_settings, read_settings_file, section, validate_settings, worker_count
from shiftscan.core import ChangepointConfiguration, SeriesKind
from shiftscan.cusum import CRITICAL_VALUES, amoc_test, simulate_critical_values
from shiftscan.errors import DegenerateSeriesError, ParameterError, SettingsError, ShiftscanError
from shiftscan.homogenize import Anchor, adjust, difference
from shiftscan.ingest import fitted_to_csv, ingest_csv, series_to_csv
from shiftscan.logging_utils import configure_logging
from shiftscan.models import PHI_BOUND, PenaltyKind, SegmentModelKind, fit_model, penalty
from shiftscan.report import build_report
from shiftscan.search import GaSettings, exhaustive_search, genetic_search
from shiftscan.segmentation import (
    DEFAULT_MIN_LEN,
    DEFAULT_WBS_THRESHOLD,
    Decision,
    binary_segmentation,
    wild_binary_segmentation,
)
from shiftscan.simulate import simulate_series

logger = logging.getLogger("shiftscan.cli")

METHODS = ("amoc", "binseg", "wbs", "exhaustive", "ga")
SEARCH_METHODS = ("exhaustive", "ga")


def _int_list(text: str) -> list[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _pick(flag, settings: dict, key: str, default):
    """Flag value, else settings-file value, else built-in default."""
    if flag is not None:
        return flag
    return settings.get(key, default)


def _write_output(text: str, out: str | None) -> None:
    if out:
        pathlib.Path(out).write_text(text, encoding="utf-8")
        logger.info("Wrote %s", out)
    else:
        sys.stdout.write(text)


def _check_detect_flags(args: argparse.Namespace, kind: SeriesKind, model: SegmentModelKind):
    parser = args.parser
    if args.penalty is not None and args.method not in SEARCH_METHODS:
        parser.error("--penalty applies only to --method exhaustive or ga")
    if model is SegmentModelKind.POISSON and kind is not SeriesKind.COUNT:
        parser.error("--model poisson requires --kind count")
    if args.level is not None and args.method not in ("amoc", "binseg"):
        parser.error("--level applies only to --method amoc or binseg")
    if (args.threshold is not None or args.intervals is not None) and args.method != "wbs":
        parser.error("--threshold/--intervals apply only to --method wbs")
    if args.seed is not None and args.method not in ("wbs", "ga"):
        parser.error("--seed applies only to --method wbs or ga")
    if args.min_len is not None and args.method not in ("binseg", "wbs"):
        parser.error("--min-len applies only to --method binseg or wbs")


def run_detect(args: argparse.Namespace) -> int:
    """Detect changepoints and print a DetectReport."""
    settings = load_settings(args.config)
    kind = SeriesKind(args.kind)
    model = SegmentModelKind(
        args.model or ("poisson" if kind is SeriesKind.COUNT else "gauss-iid")
    )
    _check_detect_flags(args, kind, model)
    series = ingest_csv(args.input, kind)

    started = time.perf_counter()
    warning = None
    level = threshold = seed = evaluations = amoc = None
    penalty_kind = penalty_value = None
    config = ChangepointConfiguration()

    if args.method == "amoc":
        level = _pick(args.level, section(settings, "binseg"), "level", 0.95)
        try:
            decision = amoc_test(series, level)
        except DegenerateSeriesError:
            warning = "series is constant; no changepoint can be detected"
        else:
            threshold = decision.critical_value
            amoc = {
                "reject": decision.reject,
                "max_abs": decision.max_abs,
                "critical_value": decision.critical_value,
                "tau_hat": decision.tau_hat,
            }
            if decision.reject:
                config = ChangepointConfiguration((decision.tau_hat,))

    elif args.method == "binseg":
        binseg = section(settings, "binseg")
        level = _pick(args.level, binseg, "level", 0.95)
        min_len = _pick(args.min_len, binseg, "min_len", DEFAULT_MIN_LEN)
        config, trace = binary_segmentation(series, level, min_len)
        if trace.entries and trace.entries[0].decision is Decision.DEGENERATE:
            warning = "series is constant; no changepoint can be detected"

    elif args.method == "wbs":
        wbs = section(settings, "wbs")
        threshold = _pick(args.threshold, wbs, "threshold", DEFAULT_WBS_THRESHOLD)
        seed = _pick(args.seed, wbs, "seed", 0)
        config, trace = wild_binary_segmentation(
            series,
            num_intervals=_pick(args.intervals, wbs, "intervals", 500),
            threshold=threshold,
            min_len=_pick(args.min_len, wbs, "min_len", DEFAULT_MIN_LEN),
            seed=seed,
        )
        if trace.entries and trace.entries[0].decision is Decision.DEGENERATE:
            warning = "series is constant; no changepoint can be detected"

    else:
        penalty_kind = PenaltyKind(args.penalty or "bic")
        if args.method == "exhaustive":
            max_n = _pick(args.max_n, section(settings, "exhaustive"), "max_n", None)
            result = exhaustive_search(series, model, penalty_kind, max_n, progress=args.progress)
        else:
            ga = section(settings, "ga")
            overrides = {
                "population_size": args.population,
                "max_generations": args.generations,
                "stagnation_limit": args.stagnation,
                "crossover_rate": args.crossover_rate,
                "mutation_rate": args.mutation_rate,
                "elitism_count": args.elitism,
                "seed": args.seed,
            }
            ga.update({k: v for k, v in overrides.items() if v is not None})
            ga_settings = GaSettings(**ga)
            seed = ga_settings.seed
            result = genetic_search(
                series, model, penalty_kind, ga_settings,
                workers=worker_count(settings), progress=args.progress,
            )
        config = result.best_config
        evaluations = result.evaluations
        penalty_value = penalty(penalty_kind, config.m, series.n)

    fit = fit_model(model, series, config)
    if fit.degenerate and warning is None:
        warning = "fit leaves no residual variance; sigma2 clamped to its floor"
    if warning:
        logger.warning(warning)

    report = build_report(
        series,
        args.method,
        fit,
        model=model.value,
        penalty=None if penalty_kind is None else penalty_kind.value,
        penalty_value=penalty_value,
        level=level,
        threshold=threshold,
        seed=seed,
        runtime_seconds=round(time.perf_counter() - started, 6),
        evaluations=evaluations,
        amoc=amoc,
        warning=warning,
    )
    logger.info(
        "Found %d changepoint(s): %s",
        len(report.taus),
        ", ".join(f"index {i} / time {t}" for i, t in zip(report.taus, report.tau_times, strict=True))
        or "none",
    )
    if args.fitted_out:
        _write_output(fitted_to_csv(series, fit.fitted_means(series.n)), args.fitted_out)
    sys.stdout.write(report.to_json() if args.format == "json" else report.to_csv())
    return 0


def run_critvals(args: argparse.Namespace) -> int:
    """Simulate CUSUM critical values next to the tabulated ones."""
    settings = load_settings(args.config)
    crit = section(settings, "critvals")
    levels = _pick(args.levels, crit, "levels", list(CRITICAL_VALUES))
    table = simulate_critical_values(
        n=_pick(args.n, crit, "n", 2000),
        reps=_pick(args.reps, crit, "reps", 100_000),
        levels=levels,
        seed=_pick(args.seed, crit, "seed", 0),
        workers=worker_count(settings),
        progress=args.progress,
    )
    lines = ["level,simulated,table,difference"]
    for level, value in table.items():
        tabulated = next(
            (v for k, v in CRITICAL_VALUES.items() if abs(k - level) < 1e-9), None
        )
        if tabulated is None:
            lines.append(f"{level},{value:.4f},,")
        else:
            lines.append(f"{level},{value:.4f},{tabulated:.3f},{value - tabulated:+.4f}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def run_simulate(args: argparse.Namespace) -> int:
    """Draw a synthetic series and echo the ground truth to stderr."""
    if abs(args.phi) > PHI_BOUND:
        args.parser.error(f"--phi must satisfy |phi| <= {PHI_BOUND}")
    model = SegmentModelKind(args.model)
    levels = args.rates if model is SegmentModelKind.POISSON and args.rates else args.deltas
    if levels is None:
        levels = [0.0] * (len(args.taus) + 1)
    series = simulate_series(
        model,
        args.n,
        taus=args.taus,
        levels=levels,
        beta=args.beta,
        phi=args.phi,
        sigma=args.sigma,
        seed=args.seed,
        start_time=args.start_time,
    )
    truth = {
        "model": model.value,
        "n": args.n,
        "taus": args.taus,
        "levels": levels,
        "beta": args.beta,
        "phi": args.phi,
        "sigma": args.sigma,
        "seed": args.seed,
    }
    print(json.dumps(truth), file=sys.stderr)
    _write_output(series_to_csv(series), args.out)
    return 0


def run_diff(args: argparse.Namespace) -> int:
    """Write the target-minus-reference series."""
    result = difference(ingest_csv(args.target), ingest_csv(args.reference))
    logger.info(
        "Differenced %s against %s over %d shared times",
        result.target_id, result.reference_id, result.series.n,
    )
    _write_output(series_to_csv(result.series), args.out)
    return 0


def _read_report(path: str) -> tuple[list[int], str | None]:
    """Changepoints and model name from a ``detect`` JSON report."""
    report_path = pathlib.Path(path)
    try:
        report = json.loads(report_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParameterError(f"Report file not found: {report_path}") from None
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParameterError(f"{report_path} is not a JSON report: {exc}") from None
    if not isinstance(report, dict) or "taus" not in report:
        raise ParameterError(f"{report_path} has no 'taus' field")
    taus = report["taus"]
    if not isinstance(taus, list) or not all(
        isinstance(t, int) and not isinstance(t, bool) for t in taus
    ):
        raise ParameterError(f"{report_path}: 'taus' must be a list of integers")
    model = report.get("model")
    if model is not None and model not in {k.value for k in SegmentModelKind}:
        raise ParameterError(f"{report_path}: unknown model {model!r}")
    return taus, model


def run_adjust(args: argparse.Namespace) -> int:
    """Remove estimated mean shifts relative to the anchor regime."""
    series = ingest_csv(args.input)
    if args.report:
        taus, report_model = _read_report(args.report)
        model = SegmentModelKind(args.model or report_model or "gauss-iid")
    else:
        taus = args.taus or []
        model = SegmentModelKind(args.model or "gauss-iid")
    if model is SegmentModelKind.POISSON:
        args.parser.error("adjust works on continuous series; use gauss-iid or gauss-trend-ar1")
    config = ChangepointConfiguration(tuple(taus))
    fit = fit_model(model, series, config)
    adjusted = adjust(series, fit, config, Anchor(args.anchor))
    _write_output(series_to_csv(adjusted), args.out)
    return 0


def run_validate(args: argparse.Namespace) -> int:
    """Validate a YAML settings file (0 valid, 1 invalid, 2 unreadable)."""
    config_path = pathlib.Path(args.config or "shiftscan.yml").resolve()
    try:
        data = read_settings_file(config_path)
    except SettingsError as exc:
        print(f"[!] {exc}", file=sys.stderr)
        return 2
    errors = validate_settings(data)
    if errors:
        print("[!] Settings validation failed:")
        for err in errors:
            print(f"  - {err}")
        return 1
    print(f"[✓] {config_path.name} passed validation")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="shiftctl", description="Detect mean-shift changepoints in time series"
    )
    ap.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    ap.add_argument("-q", "--quiet", action="store_true", help="Warnings and errors only")
    sub = ap.add_subparsers(dest="cmd", required=True)

    ap_detect = sub.add_parser("detect", help="Estimate a changepoint configuration")
    ap_detect.add_argument("--input", required=True, help="CSV with time,value rows")
    ap_detect.add_argument("--kind", choices=[k.value for k in SeriesKind], default="continuous")
    ap_detect.add_argument("--method", choices=METHODS, default="exhaustive")
    ap_detect.add_argument("--model", choices=[m.value for m in SegmentModelKind])
    ap_detect.add_argument("--penalty", choices=[p.value for p in PenaltyKind])
    ap_detect.add_argument("--level", type=float, help="AMOC confidence level (default 0.95)")
    ap_detect.add_argument("--threshold", type=float, help="WBS threshold (default 1.358)")
    ap_detect.add_argument("--intervals", type=int, help="WBS random intervals (default 500)")
    ap_detect.add_argument("--seed", type=int, help="RNG seed for wbs/ga")
    ap_detect.add_argument("--min-len", type=int, help="Shortest examinable segment (default 3)")
    ap_detect.add_argument("--max-n", type=int, help="Exhaustive search length limit")
    ap_detect.add_argument("--population", type=int, help="GA population size")
    ap_detect.add_argument("--generations", type=int, help="GA generation limit")
    ap_detect.add_argument("--stagnation", type=int, help="GA generations without improvement")
    ap_detect.add_argument("--crossover-rate", type=float, help="GA crossover probability")
    ap_detect.add_argument("--mutation-rate", type=float, help="GA per-bit mutation rate")
    ap_detect.add_argument("--elitism", type=int, help="GA elite chromosomes kept")
    ap_detect.add_argument("--format", choices=["json", "csv"], default="json")
    ap_detect.add_argument("--fitted-out", help="Write time,observed,fitted rows here")
    ap_detect.add_argument("--progress", action="store_true", help="Show a progress bar")
    ap_detect.add_argument("--config", help="YAML settings file")
    ap_detect.set_defaults(func=run_detect, parser=ap_detect)

    ap_crit = sub.add_parser("critvals", help="Simulate CUSUM critical values")
    ap_crit.add_argument("--n", type=int, help="Series length (default 2000)")
    ap_crit.add_argument("--reps", type=int, help="Replicates (default 100000)")
    ap_crit.add_argument("--levels", type=_float_list, help="Comma-separated levels")
    ap_crit.add_argument("--seed", type=int, help="RNG seed (default 0)")
    ap_crit.add_argument("--progress", action="store_true", help="Show a progress bar")
    ap_crit.add_argument("--config", help="YAML settings file")
    ap_crit.set_defaults(func=run_critvals, parser=ap_crit)

    ap_sim = sub.add_parser("simulate", help="Draw a synthetic series")
    ap_sim.add_argument("--n", type=int, required=True, help="Series length")
    ap_sim.add_argument("--model", choices=[m.value for m in SegmentModelKind], default="gauss-iid")
    ap_sim.add_argument("--taus", type=_int_list, default=[], help="Changepoint indices")
    ap_sim.add_argument("--deltas", type=_float_list, help="Regime means")
    ap_sim.add_argument("--rates", type=_float_list, help="Regime rates (poisson)")
    ap_sim.add_argument("--beta", type=float, default=0.0, help="Trend slope per step")
    ap_sim.add_argument("--phi", type=float, default=0.0, help="AR(1) coefficient")
    ap_sim.add_argument("--sigma", type=float, default=1.0, help="Noise standard deviation")
    ap_sim.add_argument("--seed", type=int, default=0)
    ap_sim.add_argument("--start-time", type=int, default=1, help="First time label")
    ap_sim.add_argument("--out", help="Output CSV (default stdout)")
    ap_sim.set_defaults(func=run_simulate, parser=ap_sim)

    ap_diff = sub.add_parser("diff", help="Target minus reference series")
    ap_diff.add_argument("--target", required=True)
    ap_diff.add_argument("--reference", required=True)
    ap_diff.add_argument("--out", help="Output CSV (default stdout)")
    ap_diff.set_defaults(func=run_diff, parser=ap_diff)

    ap_adjust = sub.add_parser("adjust", help="Homogenize a series at given changepoints")
    ap_adjust.add_argument("--input", required=True)
    group = ap_adjust.add_mutually_exclusive_group(required=True)
    group.add_argument("--taus", type=_int_list, help="Changepoint indices")
    group.add_argument("--report", help="DetectReport JSON supplying the changepoints")
    ap_adjust.add_argument("--model", choices=[m.value for m in SegmentModelKind])
    ap_adjust.add_argument(
        "--anchor", choices=[a.value for a in Anchor], default=Anchor.LAST_REGIME.value
    )
    ap_adjust.add_argument("--out", help="Output CSV (default stdout)")
    ap_adjust.set_defaults(func=run_adjust, parser=ap_adjust)

    ap_validate = sub.add_parser("validate", help="Validate a settings file")
    ap_validate.add_argument("--config", help="Path to settings (default: shiftscan.yml)")
    ap_validate.set_defaults(func=run_validate, parser=ap_validate)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(verbose=args.verbose, quiet=args.quiet)
    try:
        return args.func(args)
    except ShiftscanError as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
