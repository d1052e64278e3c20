"""Experiment configuration parsing and result serialization.

Configuration and summaries are JSON; bulk error samples and histogram data
are CSV. Floats are written with 17 significant digits so binary64 values
round-trip exactly.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .bench import DEFAULT_GRIDS, SWEEP_MEMORY_WINDOW, BenchReport, SweptParameter
from .device import PRESET_NAMES, DeviceProfile, device_kind, preset
from .provenance import TOOL_VERSION, digest
from .workload import ErrorPopulation

EXPERIMENTS = ("run", "sweep", "compare", "fit")
SUMMARY_SCHEMA = "rramvmm.summary/1"
MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 1)."""


@dataclass
class SweepConfig:
    parameter: str = "weight_bits"
    values: list | None = None
    with_nonlinearity: bool = True
    memory_window: float = SWEEP_MEMORY_WINDOW

    def resolved_values(self) -> list:
        if self.values is not None:
            return list(self.values)
        return list(DEFAULT_GRIDS[SweptParameter(self.parameter)])

    def to_dict(self) -> dict:
        return {"parameter": self.parameter, "values": self.values,
                "with_nonlinearity": self.with_nonlinearity, "memory_window": self.memory_window}


@dataclass
class ExperimentConfig:
    experiment: str = "run"
    device: str | dict = "Ag:a-Si"
    devices: list = field(default_factory=lambda: list(PRESET_NAMES))
    rows: int = 32
    cols: int = 32
    trials: int = 1000
    seed: int = 0
    nonlinearity: bool = True
    c2c: bool = True
    v_read: float = 0.1
    compensation: bool = False
    fit: bool = True
    bins: int = 100
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output_dir: str = "results"
    input: str | None = None

    def profile(self) -> DeviceProfile:
        return resolve_device(self.device, "device")

    def profiles(self) -> list:
        return [resolve_device(d, f"devices[{i}]") for i, d in enumerate(self.devices)]

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["sweep"] = self.sweep.to_dict()
        d["devices"] = list(self.devices)
        return d

    def digest(self) -> str:
        """Hash of the canonical config, excluding seed and output location."""
        d = self.to_dict()
        d.pop("seed")
        d.pop("output_dir")
        return digest(d)


_TOP_KEYS = {f.name for f in fields(ExperimentConfig)}
_SWEEP_KEYS = {f.name for f in fields(SweepConfig)}
_PROFILE_KEYS = {f.name for f in fields(DeviceProfile)}


def resolve_device(spec, where: str) -> DeviceProfile:
    """A preset name, a full inline profile, or ``{"preset": name, <overrides>}``."""
    try:
        if isinstance(spec, str):
            return preset(spec)
        if isinstance(spec, dict):
            spec = dict(spec)
            unknown = set(spec) - _PROFILE_KEYS - {"preset"}
            if unknown:
                raise ConfigError(f"{where}: unknown profile keys {sorted(unknown)}")
            if "preset" in spec:
                base = preset(spec.pop("preset"))
                return base.with_(**spec)
            missing = _PROFILE_KEYS - {"c2c_mode"} - set(spec)
            if missing:
                raise ConfigError(f"{where}: inline profile missing {sorted(missing)}")
            return DeviceProfile(**spec)
    except KeyError as exc:
        raise ConfigError(f"{where}: {exc.args[0]}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}: expected a preset name or a profile object")


def _int(d, key, lo, hi=None):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{key}: expected an integer, got {v!r}")
    if v < lo or (hi is not None and v > hi):
        raise ConfigError(f"{key}: {v} out of range")
    return v


def _bool(d, key):
    if not isinstance(d[key], bool):
        raise ConfigError(f"{key}: expected true/false, got {d[key]!r}")
    return d[key]


def _number(d, key, positive=False):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{key}: expected a finite number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{key}: must be positive")
    return float(v)


def _sweep(raw) -> SweepConfig:
    if not isinstance(raw, dict):
        raise ConfigError("sweep: expected an object")
    unknown = set(raw) - _SWEEP_KEYS
    if unknown:
        raise ConfigError(f"sweep: unknown keys {sorted(unknown)}")
    sc = SweepConfig(**raw)
    try:
        SweptParameter(sc.parameter)
    except ValueError:
        choices = ", ".join(p.value for p in SweptParameter)
        raise ConfigError(f"sweep.parameter: {sc.parameter!r} is not one of {choices}") from None
    if sc.values is not None:
        if not isinstance(sc.values, list) or not sc.values:
            raise ConfigError("sweep.values: expected a nonempty list")
        for v in sc.values:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"sweep.values: {v!r} is not a number")
    if not isinstance(sc.with_nonlinearity, bool):
        raise ConfigError("sweep.with_nonlinearity: expected true/false")
    _number({"sweep.memory_window": sc.memory_window}, "sweep.memory_window", positive=True)
    return sc


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys {sorted(unknown)}")
    d = {**ExperimentConfig().to_dict(), **raw}
    if d["experiment"] not in EXPERIMENTS:
        raise ConfigError(f"experiment: {d['experiment']!r} is not one of {', '.join(EXPERIMENTS)}")
    if "fit" not in raw:
        d["fit"] = d["experiment"] != "sweep"
    cfg = ExperimentConfig(
        experiment=d["experiment"],
        device=d["device"],
        devices=d["devices"],
        rows=_int(d, "rows", 1),
        cols=_int(d, "cols", 1),
        trials=_int(d, "trials", 1),
        seed=_int(d, "seed", 0, MAX_SEED),
        nonlinearity=_bool(d, "nonlinearity"),
        c2c=_bool(d, "c2c"),
        v_read=_number(d, "v_read", positive=True),
        compensation=_bool(d, "compensation"),
        fit=_bool(d, "fit"),
        bins=_int(d, "bins", 10),
        sweep=_sweep(d["sweep"]),
        output_dir=d["output_dir"],
        input=d["input"],
    )
    if not isinstance(cfg.devices, list) or not cfg.devices:
        raise ConfigError("devices: expected a nonempty list")
    cfg.profile()
    cfg.profiles()
    if not isinstance(cfg.output_dir, str):
        raise ConfigError("output_dir: expected a path string")
    if cfg.input is not None and not isinstance(cfg.input, str):
        raise ConfigError("input: expected a path string")
    if isinstance(cfg.device, str):
        cfg.device = device_kind(cfg.device).value
    cfg.devices = [device_kind(x).value if isinstance(x, str) else x for x in cfg.devices]
    return cfg


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return config_from_dict(raw)


def serialize_config(cfg: ExperimentConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_error_samples(population: ErrorPopulation | None, path) -> Path:
    """CSV ``trial,row,error`` in trial-major order."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            fh.write("trial,row,error\n")
            if population is not None and len(population):
                errs = population.by_trial()
                lines = [f"{t},{j},{_fmt(errs[t, j])}\n"
                         for t in range(population.n_trials) for j in range(population.rows)]
                fh.writelines(lines)
    except OSError as exc:
        raise OSError(f"cannot write error samples to {path}: {exc.strerror}") from exc
    return path


def read_error_samples(path) -> np.ndarray:
    """Error column of a sample CSV, in file order."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise ConfigError(f"{path}: empty file")
            if header == ["trial", "row", "error"]:
                col = 2
            elif "error" in header:
                col = header.index("error")
            else:
                raise ConfigError(f"{path}: expected a header with an 'error' column")
            values = []
            for r in reader:
                if not r:
                    continue
                try:
                    values.append(float(r[col]))
                except (IndexError, ValueError):
                    raise ConfigError(f"{path}:{reader.line_num}: bad sample row {r!r}") from None
            return np.array(values, dtype=np.float64)
    except OSError as exc:
        raise ConfigError(f"cannot read samples {path}: {exc.strerror}") from None


def emit_histogram(samples, bins: int = 100) -> np.ndarray:
    """Equal-width histogram over [min, max]; rows are (bin_left, bin_right, count)."""
    if bins < 10:
        raise ValueError("histogram needs at least 10 bins")
    if isinstance(samples, ErrorPopulation):
        samples = samples.samples
    x = np.asarray(samples, dtype=np.float64).ravel()
    rng = (float(x.min()), float(x.max())) if x.size else (0.0, 1.0)
    counts, edges = np.histogram(x, bins=bins, range=rng)
    return np.column_stack([edges[:-1], edges[1:], counts.astype(np.float64)])


def write_histogram(table: np.ndarray, path) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            fh.write("bin_left,bin_right,count\n")
            fh.writelines(f"{_fmt(a)},{_fmt(b)},{int(c)}\n" for a, b, c in table)
    except OSError as exc:
        raise OSError(f"cannot write histogram to {path}: {exc.strerror}") from exc
    return path


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def summary_records(report: BenchReport) -> list:
    out = []
    prov = report.provenance
    for p in report.points:
        m = p.moments.to_dict()
        rec = {
            "device": p.device,
            "series": p.series,
            "parameter": p.parameter,
            "value": p.value,
            "nonlinearity": p.nonlinearity,
            "c2c": p.c2c,
            "n": m["n"],
            "mean": m["mean"],
            "variance": m["variance"],
            "skewness": m["skewness"],
            "excess_kurtosis": m["excess_kurtosis"],
            "best_fit": None,
            "params": None,
            "aic": None,
            "bic": None,
            "ks": None,
            "fit_error": p.fit_error,
            "population_digest": p.population.config_digest,
            "config_digest": prov.get("config_digest"),
            "seed": prov.get("seed"),
        }
        if p.fit is not None:
            rec.update(best_fit=p.fit.label, family=p.fit.family.value, params=p.fit.params,
                       aic=p.fit.aic, bic=p.fit.bic, ks=p.fit.ks_stat,
                       log_likelihood=p.fit.log_likelihood, fit_flags=list(p.fit.flags))
        out.append(_jsonable(rec))
    return out


def summary_document(report: BenchReport | None) -> dict:
    prov = report.provenance if report is not None else {}
    return {
        "schema": SUMMARY_SCHEMA,
        "kind": report.kind if report is not None else None,
        "config_digest": prov.get("config_digest"),
        "seed": prov.get("seed"),
        "tool_version": prov.get("tool_version", TOOL_VERSION),
        "records": summary_records(report) if report is not None else [],
    }


def write_summary(report: BenchReport | None, path) -> Path:
    """Per-point statistics and best fits as JSON, one record per device setting or sweep value."""
    path = Path(path)
    try:
        path.write_text(json.dumps(summary_document(report), indent=2) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write summary to {path}: {exc.strerror}") from exc
    return path


def write_manifest(out_dir, files, config_digest: str, seed: int) -> Path:
    """Provenance sidecar listing every output with its config digest and seed."""
    out_dir = Path(out_dir)
    doc = {
        "config_digest": config_digest,
        "seed": seed,
        "tool_version": TOOL_VERSION,
        "files": sorted(str(Path(f).name) for f in files),
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path
