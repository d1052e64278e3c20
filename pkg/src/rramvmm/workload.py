"""Seeded random VMM trials and Monte-Carlo error populations."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .crossbar import DEFAULT_V_READ, ideal_vmm, ladder_levels
from .device import DeviceProfile, c2c_noise_scale
from .provenance import digest

DEFAULT_ROWS = 32
DEFAULT_COLS = 32
DEFAULT_TRIALS = 1000

# stream ids inside one trial's key space
_INPUT_STREAM = 0
_NOISE_STREAM = 1


def trial_stream(master_seed: int, trial_index: int, stream: int) -> np.random.Generator:
    """Counter-based generator keyed by (master_seed, trial_index, stream)."""
    if trial_index < 0:
        raise ValueError("trial_index must be >= 0")
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(trial_index), int(stream)))
    return np.random.Generator(np.random.Philox(ss))


def generate_trial(master_seed: int, trial_index: int, rows: int = DEFAULT_ROWS,
                   cols: int = DEFAULT_COLS) -> tuple[np.ndarray, np.ndarray]:
    """Draw (A, x) with iid Uniform(-1, 1) entries for one trial."""
    rng = trial_stream(master_seed, trial_index, _INPUT_STREAM)
    A = rng.uniform(-1.0, 1.0, size=(rows, cols))
    x = rng.uniform(-1.0, 1.0, size=cols)
    return A, x


def programming_noise(master_seed: int, trial_index: int, rows: int, cols: int) -> np.ndarray:
    """Standard-normal draws for the (plus, minus) devices of one trial."""
    return trial_stream(master_seed, trial_index, _NOISE_STREAM).standard_normal((2, rows, cols))


@dataclass
class VmmTrial:
    trial_index: int
    A: np.ndarray
    x: np.ndarray
    y_exact: np.ndarray
    y_hat: np.ndarray

    @property
    def errors(self) -> np.ndarray:
        return self.y_hat - self.y_exact


def effective_profile(profile: DeviceProfile, nonlinearity: bool = True,
                      c2c: bool = True) -> DeviceProfile:
    """Apply the non-ideality toggles; switched-off effects are zeroed."""
    p = profile
    if not nonlinearity:
        p = p.with_(nl_potentiation=0.0, nl_depression=0.0)
    if not c2c:
        p = p.with_(c2c_sigma=0.0)
    return p


def _simulate(A, x, noise, profile: DeviceProfile, compensate: bool):
    per_pulse = profile.c2c_mode.value == "per_pulse"
    return kernels.simulate(A, x, noise, ladder_levels(profile), profile.g_min, profile.g_max,
                            float(c2c_noise_scale(profile)), per_pulse, compensate)


def simulate_trial(A, x, profile: DeviceProfile, rng: np.random.Generator | None = None, *,
                   noise=None, compensate: bool = False) -> np.ndarray:
    """Decoded crossbar output for one (A, x); draws device noise from ``rng``."""
    A = np.asarray(A, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if A.ndim != 2 or x.shape != (A.shape[1],):
        raise ValueError(f"dimension mismatch: A {A.shape} vs x {x.shape}")
    if np.any(np.abs(A) > 1) or np.any(np.abs(x) > 1):
        raise ValueError("A and x entries must lie in [-1, 1]")
    if noise is None:
        rng = rng if rng is not None else np.random.default_rng()
        noise = rng.standard_normal((2,) + A.shape)
    noise = np.asarray(noise, dtype=np.float64).reshape((1, 2) + A.shape)
    return _simulate(A[None], x[None], noise, profile, compensate)[0]


def run_trial(A, x, profile: DeviceProfile, rng: np.random.Generator | None = None, *,
              noise=None, compensate: bool = False) -> np.ndarray:
    """Error vector decode(analog_vmm(encode(A), x)) - A @ x."""
    y_hat = simulate_trial(A, x, profile, rng, noise=noise, compensate=compensate)
    return y_hat - ideal_vmm(A, x)


@dataclass
class ErrorPopulation:
    samples: np.ndarray
    n_trials: int
    rows: int
    config_digest: str
    master_seed: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.samples.shape != (self.n_trials * self.rows,):
            raise ValueError("sample count must equal n_trials * rows")

    def __len__(self):
        return self.samples.shape[0]

    def by_trial(self) -> np.ndarray:
        return self.samples.reshape(self.n_trials, self.rows)


def population_config(profile: DeviceProfile, n_trials: int, rows: int, cols: int,
                      nonlinearity: bool, c2c: bool, v_read: float, compensate: bool) -> dict:
    return {
        "profile": profile.to_dict(),
        "n_trials": int(n_trials),
        "rows": int(rows),
        "cols": int(cols),
        "nonlinearity": bool(nonlinearity),
        "c2c": bool(c2c),
        "v_read": float(v_read),
        "compensate": bool(compensate),
    }


def _chunk_errors(start, stop, profile, rows, cols, master_seed, compensate):
    count = stop - start
    A = np.empty((count, rows, cols))
    x = np.empty((count, cols))
    noise = np.empty((count, 2, rows, cols))
    for k, t in enumerate(range(start, stop)):
        A[k], x[k] = generate_trial(master_seed, t, rows, cols)
        noise[k] = programming_noise(master_seed, t, rows, cols)
    y_hat = _simulate(A, x, noise, profile, compensate)
    return y_hat - ideal_vmm(A, x)


def run_population(profile: DeviceProfile, n_trials: int = DEFAULT_TRIALS,
                   rows: int = DEFAULT_ROWS, cols: int = DEFAULT_COLS, master_seed: int = 0, *,
                   nonlinearity: bool = True, c2c: bool = True,
                   v_read: float = DEFAULT_V_READ, compensate: bool = False,
                   threads: int = 1, chunk_size: int = 50) -> ErrorPopulation:
    """Concatenate per-trial errors for trials ``0 .. n_trials-1`` (trial-major).

    The result depends only on the arguments; ``threads`` and ``chunk_size``
    change scheduling, never the samples.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    eff = effective_profile(profile, nonlinearity, c2c)
    bounds = [(s, min(s + chunk_size, n_trials)) for s in range(0, n_trials, chunk_size)]
    args = (eff, rows, cols, master_seed, compensate)
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _chunk_errors(*b, *args), bounds))
    else:
        parts = [_chunk_errors(*b, *args) for b in bounds]
    samples = np.concatenate(parts, axis=0).reshape(-1)
    cfg = population_config(profile, n_trials, rows, cols, nonlinearity, c2c, v_read, compensate)
    cfg["profile"] = eff.to_dict()
    return ErrorPopulation(samples, n_trials, rows, digest(cfg), int(master_seed),
                           meta={"device": profile.name, "nonlinearity": bool(nonlinearity),
                                 "c2c": bool(c2c)})


def iter_trials(profile: DeviceProfile, n_trials: int, rows: int = DEFAULT_ROWS,
                cols: int = DEFAULT_COLS, master_seed: int = 0, *, compensate: bool = False):
    """Yield full :class:`VmmTrial` records, matching :func:`run_population` samples."""
    for t in range(n_trials):
        A, x = generate_trial(master_seed, t, rows, cols)
        noise = programming_noise(master_seed, t, rows, cols)
        y_hat = simulate_trial(A, x, profile, noise=noise, compensate=compensate)
        yield VmmTrial(t, A, x, ideal_vmm(A, x), y_hat)
