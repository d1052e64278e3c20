"""Differential-pair crossbar: weight encoding, programming, analog readout, decoding."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .device import DeviceProfile, c2c_noise_scale, ladder_conductance, ConductanceLadder

DEFAULT_V_READ = 0.1


@lru_cache(maxsize=32)
def _levels(n_steps: int, g_min: float, g_max: float, nu: float) -> np.ndarray:
    levels = ladder_conductance(np.arange(n_steps + 1), ConductanceLadder(n_steps, g_min, g_max, nu))
    levels = np.ascontiguousarray(levels, dtype=np.float64)
    levels.setflags(write=False)
    return levels


def ladder_levels(profile: DeviceProfile, direction: str = "potentiation") -> np.ndarray:
    """Every reachable conductance of ``profile`` for one programming direction."""
    lad = profile.ladder(direction)
    return _levels(lad.n_steps, lad.g_min, lad.g_max, float(lad.nu))


@dataclass(frozen=True, eq=False)
class CrossbarState:
    """A programmed array. Row ``j`` / column ``i`` hold logical weight ``A[j, i]``."""

    rows: int
    cols: int
    g_plus: np.ndarray
    g_minus: np.ndarray
    v_read: float
    profile: DeviceProfile
    n_plus: np.ndarray
    n_minus: np.ndarray
    compensate: bool = False

    def __post_init__(self):
        if self.g_plus.shape != (self.rows, self.cols) or self.g_minus.shape != self.g_plus.shape:
            raise ValueError("conductance matrices must both be rows x cols")
        lo, hi = self.profile.g_min, self.profile.g_max
        for g in (self.g_plus, self.g_minus):
            if g.min() < lo or g.max() > hi:
                raise ValueError("conductance outside [g_min, g_max]")
        for arr in (self.g_plus, self.g_minus, self.n_plus, self.n_minus):
            arr.setflags(write=False)


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {A.shape}")
    return A


def ideal_vmm(A, x) -> np.ndarray:
    """Software reference product A @ x.

    Accepts a single ``(rows, cols)`` matrix with a ``(cols,)`` vector or
    stacked batches ``(T, rows, cols)`` / ``(T, cols)``. Summation runs column
    by column so a trial's result does not depend on batch size.
    """
    A = np.asarray(A, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if A.ndim < 2 or x.shape[-1] != A.shape[-1] or A.shape[:-2] != x.shape[:-1]:
        raise ValueError(f"dimension mismatch: A {A.shape} vs x {x.shape}")
    return kernels.column_sum(A, x)


def _check_unit(arr, what):
    if np.any(np.isnan(arr)) or np.any(np.abs(arr) > 1.0):
        raise ValueError(f"{what} entries must lie in [-1, 1]")


def encode_and_program(A, profile: DeviceProfile, v_read: float = DEFAULT_V_READ,
                       rng: np.random.Generator | None = None, *, noise=None,
                       compensate: bool = False,
                       previous: CrossbarState | None = None) -> CrossbarState:
    """Map ``A`` onto conductance pairs and program them through the device model.

    Positive parts go to ``g_plus``, negative parts to ``g_minus``. One
    standard-normal draw per device comes from ``rng`` (or ``noise``, shape
    ``(2, rows, cols)``); draws are consumed even when C-to-C is off so the
    stream layout never depends on the noise level.

    Arrays are programmed from reset along the potentiation ladder. Passing
    ``previous`` enables bidirectional programming: cells whose target step
    sits below their previous step follow the depression ladder instead.
    """
    A = _as_matrix(A)
    _check_unit(A, "weight")
    if not v_read > 0:
        raise ValueError("v_read must be positive")
    rows, cols = A.shape
    if noise is None:
        rng = rng if rng is not None else np.random.default_rng()
        noise = rng.standard_normal((2, rows, cols))
    noise = np.asarray(noise, dtype=np.float64).reshape(1, 2, rows, cols)
    p = profile
    per_pulse = p.c2c_mode.value == "per_pulse"
    scale = float(c2c_noise_scale(p))
    gp, gm, n_p, n_m = kernels.program(A[None], noise, ladder_levels(p), p.g_min, p.g_max,
                                       scale, per_pulse, compensate)
    gp, gm, n_p, n_m = gp[0], gm[0], n_p[0], n_m[0]
    if previous is not None:
        if previous.g_plus.shape != A.shape:
            raise ValueError("previous crossbar has a different geometry")
        dep_levels = ladder_levels(p, "depression")
        for g, n, prev_n, z in ((gp, n_p, previous.n_plus, noise[0, 0]),
                                (gm, n_m, previous.n_minus, noise[0, 1])):
            down = n < prev_n
            if np.any(down):
                s = c2c_noise_scale(p, n[down]) if per_pulse else scale
                g[down] = np.clip(dep_levels[n[down]] + z[down] * s, p.g_min, p.g_max)
    return CrossbarState(rows, cols, gp, gm, float(v_read), p, n_p, n_m, compensate)


def rail_currents(cb: CrossbarState, x) -> tuple[np.ndarray, np.ndarray]:
    """Bit-line currents of the positive and negative rails."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (cb.cols,):
        raise ValueError(f"input length {x.shape} does not match {cb.cols} columns")
    _check_unit(x, "input")
    v = x * cb.v_read
    i_plus = kernels.column_sum(cb.g_plus, v)
    i_minus = kernels.column_sum(cb.g_minus, v)
    if cb.compensate:
        baseline = v.sum() * cb.profile.g_min
        i_plus = i_plus - baseline
        i_minus = i_minus - baseline
    return i_plus, i_minus


def analog_vmm(cb: CrossbarState, x) -> np.ndarray:
    """Differential output current per row: sum_i (x_i v_read) (g+ - g-)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (cb.cols,):
        raise ValueError(f"input length {x.shape} does not match {cb.cols} columns")
    _check_unit(x, "input")
    if cb.compensate:
        i_plus, i_minus = rail_currents(cb, x)
        return i_plus - i_minus
    return kernels.column_sum(cb.g_plus - cb.g_minus, x * cb.v_read)


def decode_output(current, cb: CrossbarState) -> np.ndarray:
    """Convert readout currents to numbers.

    Normalizes by ``v_read * g_max`` assuming an ideal zero off-state, so the
    ``g_min`` floor survives as a residual ~1/MW error. With compensation the
    baseline was already removed and the range ``g_max - g_min`` is used.
    """
    p = cb.profile
    norm = (p.g_max - p.g_min) if cb.compensate else p.g_max
    return np.asarray(current, dtype=np.float64) / (cb.v_read * norm)
