"""Command-line entry point.

Exit codes: 0 success, 1 invalid configuration, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import bench, io
from .device import PRESET_NAMES, preset
from .stats import moments, select_best_fit
from .stats.distributions import FitError
from .workload import ErrorPopulation, run_population

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "", name)


def _print_records(report):
    for rec in io.summary_records(report):
        label = rec["device"] if rec["value"] is None else f"{rec['parameter']}={rec['value']:g}"
        fit = rec["best_fit"] or "-"
        print(f"{rec['series']:>22} {label:>20}  mean={rec['mean']:+.5f}  var={rec['variance']:.6g}"
              f"  skew={rec['skewness'] if rec['skewness'] is not None else float('nan'):+.4f}"
              f"  kurt={rec['excess_kurtosis'] if rec['excess_kurtosis'] is not None else float('nan'):+.4f}"
              f"  best={fit}")


def _build_config(args, experiment):
    raw = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise io.ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
        io.parse_config(text)
        raw = json.loads(text)
    if experiment in io.EXPERIMENTS:
        if raw.get("experiment", experiment) != experiment:
            raise io.ConfigError(
                f"config declares experiment {raw['experiment']!r} but `{experiment}` was invoked")
        raw = {**raw, "experiment": experiment}
    cfg = io.config_from_dict(raw)
    if args.seed is not None:
        if not 0 <= args.seed <= io.MAX_SEED:
            raise io.ConfigError("--seed must be an unsigned 64-bit integer")
        cfg.seed = args.seed
    if args.out is not None:
        cfg.output_dir = args.out
    if getattr(args, "input", None):
        cfg.input = args.input
    if getattr(args, "bins", None) is not None:
        if args.bins < 10:
            raise io.ConfigError("--bins must be >= 10")
        cfg.bins = args.bins
    if args.threads < 1:
        raise io.ConfigError("--threads must be >= 1")
    return cfg


def _out_dir(cfg) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_presets(args) -> int:
    table = [preset(n).to_dict() for n in PRESET_NAMES]
    print(json.dumps(table, indent=2))
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _build_config(args, "run")
    out = _out_dir(cfg)
    profile = cfg.profile()
    pop = run_population(profile, cfg.trials, cfg.rows, cfg.cols, cfg.seed,
                         nonlinearity=cfg.nonlinearity, c2c=cfg.c2c, v_read=cfg.v_read,
                         compensate=cfg.compensation, threads=args.threads)
    point = bench.BenchPoint("run", profile.name, cfg.nonlinearity, cfg.c2c, moments(pop.samples),
                             pop, profile)
    if cfg.fit:
        try:
            point.fit = select_best_fit(pop.samples, threads=args.threads)
        except (FitError, ValueError) as exc:
            point.fit_error = str(exc)
    report = bench.BenchReport("run", [point], {"seed": cfg.seed, "config_digest": cfg.digest(),
                                                "tool_version": io.TOOL_VERSION})
    files = [io.write_error_samples(pop, out / "samples.csv"),
             io.write_histogram(io.emit_histogram(pop, cfg.bins), out / "histogram.csv"),
             io.write_summary(report, out / "summary.json")]
    io.write_manifest(out, files, cfg.digest(), cfg.seed)
    _print_records(report)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _build_config(args, "sweep")
    out = _out_dir(cfg)
    sc = cfg.sweep
    param = bench.SweptParameter(sc.parameter)
    nl, c2c = bench.DEFAULT_TOGGLES[param]
    base = cfg.profile()
    if param is not bench.SweptParameter.MEMORY_WINDOW:
        base = base.with_(memory_window=sc.memory_window)
    try:
        spec = bench.SweepSpec(base, param, sc.resolved_values(), nl, c2c, cfg.trials, cfg.seed,
                               cfg.rows, cfg.cols, cfg.fit)
    except ValueError as exc:
        raise io.ConfigError(f"sweep: {exc}") from None
    if param is bench.SweptParameter.C2C:
        report = bench.sweep_c2c(spec, sc.with_nonlinearity, threads=args.threads,
                                 config_digest=cfg.digest())
    else:
        report = bench.run_sweep(spec, threads=args.threads, config_digest=cfg.digest())
    files = []
    for i, p in enumerate(report.points):
        files.append(io.write_error_samples(p.population, out / f"samples_{p.series}_{i:02d}.csv"))
    files.append(io.write_summary(report, out / "summary.json"))
    io.write_manifest(out, files, cfg.digest(), cfg.seed)
    _print_records(report)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _build_config(args, "compare")
    out = _out_dir(cfg)
    report = bench.compare_devices(cfg.profiles(), cfg.trials, cfg.seed, rows=cfg.rows,
                                   cols=cfg.cols, fit=cfg.fit, threads=args.threads,
                                   config_digest=cfg.digest())
    files = []
    for p in report.points:
        stem = f"{_slug(p.device)}_{p.series}"
        files.append(io.write_error_samples(p.population, out / f"samples_{stem}.csv"))
        files.append(io.write_histogram(io.emit_histogram(p.population, cfg.bins),
                                        out / f"histogram_{stem}.csv"))
    files.append(io.write_summary(report, out / "summary.json"))
    io.write_manifest(out, files, cfg.digest(), cfg.seed)
    _print_records(report)
    return EXIT_OK


def _input_samples(cfg):
    if not cfg.input:
        raise io.ConfigError("an input samples CSV is required (--input or config 'input')")
    return io.read_error_samples(cfg.input)


def cmd_fit(args) -> int:
    cfg = _build_config(args, "fit")
    out = _out_dir(cfg)
    x = _input_samples(cfg)
    pop = ErrorPopulation(x, x.shape[0], 1, cfg.digest(), cfg.seed,
                          meta={"source": cfg.input})
    point = bench.BenchPoint("fit", Path(cfg.input).stem, cfg.nonlinearity, cfg.c2c,
                             moments(x), pop, cfg.profile())
    point.fit = select_best_fit(x, threads=args.threads)
    report = bench.BenchReport("fit", [point], {"seed": cfg.seed, "config_digest": cfg.digest(),
                                                "tool_version": io.TOOL_VERSION})
    files = [io.write_summary(report, out / "summary.json")]
    io.write_manifest(out, files, cfg.digest(), cfg.seed)
    _print_records(report)
    return EXIT_OK


def cmd_histogram(args) -> int:
    cfg = _build_config(args, "histogram")
    out = _out_dir(cfg)
    x = _input_samples(cfg)
    path = io.write_histogram(io.emit_histogram(x, cfg.bins), out / "histogram.csv")
    io.write_manifest(out, [path], cfg.digest(), cfg.seed)
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rramvmm",
                                     description="RRAM crossbar VMM error benchmarking")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, inputs=False):
        p.add_argument("--config", help="JSON experiment configuration")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        p.add_argument("--threads", type=int, default=1, help="worker threads")
        if inputs:
            p.add_argument("--input", help="error samples CSV (trial,row,error)")
            p.add_argument("--bins", type=int, help="histogram bin count (>= 10)")
        return p

    sub.add_parser("presets", help="print the device preset table").set_defaults(func=cmd_presets)
    common(sub.add_parser("run", help="one device population")).set_defaults(func=cmd_run)
    common(sub.add_parser("sweep", help="device parameter sweep")).set_defaults(func=cmd_sweep)
    common(sub.add_parser("compare", help="device comparison")).set_defaults(func=cmd_compare)
    common(sub.add_parser("fit", help="fit an existing sample file"), True).set_defaults(func=cmd_fit)
    common(sub.add_parser("histogram", help="histogram an existing sample file"),
           True).set_defaults(func=cmd_histogram)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except io.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit code
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
