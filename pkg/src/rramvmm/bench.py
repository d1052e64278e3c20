"""Parameter sweeps and the device comparison built on error populations."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .device import DeviceProfile, preset, PRESET_NAMES
from .provenance import TOOL_VERSION, digest
from .stats import DistributionFit, MomentSummary, moments, select_best_fit
from .stats.distributions import FitError
from .workload import DEFAULT_COLS, DEFAULT_ROWS, ErrorPopulation, run_population


class SweptParameter(str, enum.Enum):
    WEIGHT_BITS = "weight_bits"
    MEMORY_WINDOW = "memory_window"
    NONLINEARITY = "nonlinearity"
    C2C = "c2c"


DEFAULT_GRIDS = {
    SweptParameter.WEIGHT_BITS: tuple(range(1, 12)),
    SweptParameter.MEMORY_WINDOW: (12.5, 25.0, 50.0, 100.0),
    SweptParameter.NONLINEARITY: (0.0, 1.0, 2.0, 3.0, 4.0, 5.0),
    SweptParameter.C2C: (0.0, 0.01, 0.02, 0.035, 0.05),
}

# toggles (nonlinearity, c2c) used by each sweep in its reference setup
DEFAULT_TOGGLES = {
    SweptParameter.WEIGHT_BITS: (False, False),
    SweptParameter.MEMORY_WINDOW: (False, False),
    SweptParameter.NONLINEARITY: (True, False),
    SweptParameter.C2C: (False, True),
}

SWEEP_MEMORY_WINDOW = 100.0


def modified_agsi(memory_window: float = SWEEP_MEMORY_WINDOW) -> DeviceProfile:
    """Ag:a-Si with its memory window widened, the base system of every sweep."""
    return preset("Ag:a-Si").with_(memory_window=memory_window)


@dataclass(frozen=True)
class SweepSpec:
    base_profile: DeviceProfile
    swept_parameter: SweptParameter
    values: tuple
    nonlinearity: bool = False
    c2c: bool = False
    trials: int = 200
    master_seed: int = 0
    rows: int = DEFAULT_ROWS
    cols: int = DEFAULT_COLS
    fit: bool = False

    def __post_init__(self):
        object.__setattr__(self, "swept_parameter", SweptParameter(self.swept_parameter))
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError("sweep needs at least one value")
        diffs = np.diff(values)
        if len(values) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("sweep values must be strictly monotone")
        if self.swept_parameter is SweptParameter.WEIGHT_BITS:
            if any(v != int(v) or v < 1 for v in values):
                raise ValueError("weight_bits values must be integers >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        object.__setattr__(self, "values", values)

    def profile_at(self, value: float) -> DeviceProfile:
        p = self.base_profile
        param = self.swept_parameter
        if param is SweptParameter.WEIGHT_BITS:
            return p.with_(states=2 ** int(value))
        if param is SweptParameter.MEMORY_WINDOW:
            return p.with_(memory_window=float(value))
        if param is SweptParameter.NONLINEARITY:
            return p.with_(nl_potentiation=float(value), nl_depression=-float(value))
        return p.with_(c2c_sigma=float(value))

    def to_dict(self) -> dict:
        return {
            "base_profile": self.base_profile.to_dict(),
            "swept_parameter": self.swept_parameter.value,
            "values": list(self.values),
            "nonlinearity": self.nonlinearity,
            "c2c": self.c2c,
            "trials": self.trials,
            "rows": self.rows,
            "cols": self.cols,
            "fit": self.fit,
        }


def default_sweep(parameter, trials: int = 200, master_seed: int = 0, **overrides) -> SweepSpec:
    parameter = SweptParameter(parameter)
    nl, c2c = DEFAULT_TOGGLES[parameter]
    kwargs = dict(base_profile=modified_agsi(), swept_parameter=parameter,
                  values=DEFAULT_GRIDS[parameter], nonlinearity=nl, c2c=c2c, trials=trials,
                  master_seed=master_seed)
    kwargs.update(overrides)
    return SweepSpec(**kwargs)


@dataclass
class BenchPoint:
    series: str
    device: str
    nonlinearity: bool
    c2c: bool
    moments: MomentSummary
    population: ErrorPopulation = field(repr=False)
    profile: DeviceProfile = field(repr=False)
    parameter: str | None = None
    value: float | None = None
    fit: DistributionFit | None = None
    fit_error: str | None = None


@dataclass
class BenchReport:
    kind: str
    points: list
    provenance: dict

    def series(self, name: str) -> list:
        return [p for p in self.points if p.series == name]

    def variances(self, series: str | None = None) -> list:
        pts = self.points if series is None else self.series(series)
        return [p.moments.variance for p in pts]

    def __len__(self):
        return len(self.points)


def _provenance(cfg: dict, seed: int, config_digest: str | None) -> dict:
    return {
        "seed": int(seed),
        "config_digest": config_digest if config_digest is not None else digest(cfg),
        "tool_version": TOOL_VERSION,
    }


def _point(series, profile, trials, rows, cols, seed, nonlinearity, c2c, fit, threads,
           parameter=None, value=None, label=None):
    pop = run_population(profile, trials, rows, cols, seed, nonlinearity=nonlinearity, c2c=c2c,
                         threads=threads)
    point = BenchPoint(series, label or profile.name, nonlinearity, c2c, moments(pop.samples), pop,
                       profile, parameter, value)
    if fit:
        try:
            point.fit = select_best_fit(pop.samples, threads=threads)
        except (FitError, ValueError) as exc:
            point.fit_error = str(exc)
    return point


def run_sweep(spec: SweepSpec, *, series: str = "main", threads: int = 1,
              config_digest: str | None = None) -> BenchReport:
    """One population per sweep value, all sharing the spec's master seed."""
    points = [
        _point(series, spec.profile_at(v), spec.trials, spec.rows, spec.cols, spec.master_seed,
               spec.nonlinearity, spec.c2c, spec.fit, threads,
               parameter=spec.swept_parameter.value, value=v, label=spec.base_profile.name)
        for v in spec.values
    ]
    return BenchReport(f"sweep:{spec.swept_parameter.value}", points,
                       _provenance(spec.to_dict(), spec.master_seed, config_digest))


def _require(spec: SweepSpec, parameter: SweptParameter):
    if spec.swept_parameter is not parameter:
        raise ValueError(f"expected a {parameter.value} sweep, got {spec.swept_parameter.value}")


def sweep_weight_bits(spec: SweepSpec, **kw) -> BenchReport:
    _require(spec, SweptParameter.WEIGHT_BITS)
    return run_sweep(spec, **kw)


def sweep_memory_window(spec: SweepSpec, **kw) -> BenchReport:
    _require(spec, SweptParameter.MEMORY_WINDOW)
    return run_sweep(spec, **kw)


def sweep_nonlinearity(spec: SweepSpec, **kw) -> BenchReport:
    _require(spec, SweptParameter.NONLINEARITY)
    return run_sweep(spec, **kw)


def sweep_c2c(spec: SweepSpec, with_nonlinearity: bool = True, *, threads: int = 1,
              config_digest: str | None = None) -> BenchReport:
    """C-to-C sweep without nonlinearity, plus a with-nonlinearity series on request.

    The with-nonlinearity series keeps the base profile's own nonlinearity pair.
    """
    _require(spec, SweptParameter.C2C)
    without = SweepSpec(**{**spec.__dict__, "nonlinearity": False, "c2c": True})
    report = run_sweep(without, series="without_nonlinearity", threads=threads,
                       config_digest=config_digest)
    if with_nonlinearity:
        with_nl = SweepSpec(**{**spec.__dict__, "nonlinearity": True, "c2c": True})
        report.points += run_sweep(with_nl, series="with_nonlinearity", threads=threads).points
    cfg = {**spec.to_dict(), "with_nonlinearity": bool(with_nonlinearity)}
    report.provenance = _provenance(cfg, spec.master_seed, config_digest)
    return report


def variance_comparison(report: BenchReport) -> list:
    """(c2c, variance without NL, variance with NL) rows of a two-series C-to-C report."""
    off = report.series("without_nonlinearity")
    on = report.series("with_nonlinearity")
    return [(a.value, a.moments.variance, b.moments.variance) for a, b in zip(off, on)]


def compare_devices(presets=PRESET_NAMES, trials: int = 1000, seed: int = 0, *,
                    rows: int = DEFAULT_ROWS, cols: int = DEFAULT_COLS, fit: bool = True,
                    threads: int = 1, config_digest: str | None = None) -> BenchReport:
    """Each preset with non-idealities off, then on."""
    profiles = [p if isinstance(p, DeviceProfile) else preset(p) for p in presets]
    points = []
    for profile in profiles:
        for on in (False, True):
            series = "nonideal" if on else "ideal"
            points.append(_point(series, profile, trials, rows, cols, seed, on, on, fit, threads))
    cfg = {"presets": [p.to_dict() for p in profiles], "trials": trials, "rows": rows,
           "cols": cols, "fit": fit}
    return BenchReport("compare", points, _provenance(cfg, seed, config_digest))


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
        return math.nan
    return float(np.corrcoef(x, y)[0, 1])
