"""RRAM device physics: conductance ladders, C-to-C noise and device presets."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np


class C2CMode(str, enum.Enum):
    PER_WRITE = "per_write"
    PER_PULSE = "per_pulse"


class DeviceKind(str, enum.Enum):
    AgSi = "Ag:a-Si"
    TaOxHfOx = "TaOx/HfOx"
    AlOxHfO2 = "AlOx/HfO2"
    EpiRAM = "EpiRAM"


@dataclass(frozen=True)
class DeviceProfile:
    """Physical parameters of one RRAM device technology.

    ``memory_window`` may be ``math.inf``, which models an ideal zero
    off-state (``g_min == 0``).
    """

    name: str
    states: int
    nl_potentiation: float
    nl_depression: float
    r_on: float
    memory_window: float
    c2c_sigma: float
    c2c_mode: C2CMode = C2CMode.PER_WRITE

    def __post_init__(self):
        if int(self.states) != self.states or self.states < 2:
            raise ValueError(f"states must be an integer >= 2, got {self.states}")
        if not self.memory_window > 1:
            raise ValueError(f"memory_window must be > 1, got {self.memory_window}")
        if not self.r_on > 0 or not math.isfinite(self.r_on):
            raise ValueError(f"r_on must be a positive finite resistance, got {self.r_on}")
        if not 0 <= self.c2c_sigma <= 1:
            raise ValueError(f"c2c_sigma must lie in [0, 1], got {self.c2c_sigma}")
        object.__setattr__(self, "states", int(self.states))
        object.__setattr__(self, "c2c_mode", C2CMode(self.c2c_mode))

    @property
    def g_max(self) -> float:
        return 1.0 / self.r_on

    @property
    def g_min(self) -> float:
        if math.isinf(self.memory_window):
            return 0.0
        return self.g_max / self.memory_window

    @property
    def n_steps(self) -> int:
        return self.states - 1

    @property
    def weight_bits(self) -> float:
        return math.log2(self.states)

    def ladder(self, direction: str = "potentiation") -> ConductanceLadder:
        if direction == "potentiation":
            nu = self.nl_potentiation
        elif direction == "depression":
            nu = self.nl_depression
        else:
            raise ValueError(f"unknown programming direction {direction!r}")
        return ConductanceLadder(self.n_steps, self.g_min, self.g_max, nu)

    def with_(self, **changes) -> DeviceProfile:
        return replace(self, **changes)

    def ideal(self) -> DeviceProfile:
        """Same device with nonlinearity and C-to-C variation switched off."""
        return replace(self, nl_potentiation=0.0, nl_depression=0.0, c2c_sigma=0.0)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "states": self.states,
            "nl_potentiation": self.nl_potentiation,
            "nl_depression": self.nl_depression,
            "r_on": self.r_on,
            "memory_window": self.memory_window,
            "c2c_sigma": self.c2c_sigma,
            "c2c_mode": self.c2c_mode.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> DeviceProfile:
        return cls(**d)


@dataclass(frozen=True)
class ConductanceLadder:
    n_steps: int
    g_min: float
    g_max: float
    nu: float

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("a ladder needs at least one step")
        if not 0 <= self.g_min < self.g_max:
            raise ValueError("ladder requires 0 <= g_min < g_max")

    def __call__(self, n):
        return ladder_conductance(n, self)

    def levels(self) -> np.ndarray:
        return ladder_conductance(np.arange(self.n_steps + 1), self)


_SMALL_NU = 1e-8


def normalized_ladder(n, n_steps: int, nu: float):
    """Fraction of the conductance range reached after ``n`` of ``n_steps`` pulses.

    ``(1 - exp(-nu n/N)) / (1 - exp(-nu))``, evaluated with ``expm1`` so small
    ``nu`` degrades smoothly onto the linear ladder ``n/N``.
    """
    frac = np.asarray(n, dtype=np.float64) / n_steps
    if nu == 0.0:
        return frac
    if abs(nu) < _SMALL_NU:
        # first-order series; expm1 underflows for subnormal nu
        return frac * (1.0 + 0.5 * nu * (1.0 - frac))
    return np.expm1(-nu * frac) / np.expm1(-nu)


def ladder_conductance(n, ladder: ConductanceLadder):
    n_arr = np.asarray(n)
    if np.any(n_arr < 0) or np.any(n_arr > ladder.n_steps):
        raise ValueError(f"step index outside [0, {ladder.n_steps}]")
    g = ladder.g_min + normalized_ladder(n_arr, ladder.n_steps, ladder.nu) * (
        ladder.g_max - ladder.g_min
    )
    # pin the endpoints against expm1 rounding
    g = np.where(n_arr == 0, ladder.g_min, np.where(n_arr == ladder.n_steps, ladder.g_max, g))
    return g[()] if g.ndim == 0 else g


def target_state_for_weight(u, n_steps: int):
    """Step index reached by linear pulse counting; halves round away from zero."""
    u_arr = np.asarray(u, dtype=np.float64)
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if np.any(u_arr < 0) or np.any(u_arr > 1) or np.any(np.isnan(u_arr)):
        raise ValueError("normalized weight must lie in [0, 1]")
    n = np.floor(u_arr * n_steps + 0.5).astype(np.int64)
    return int(n) if n.ndim == 0 else n


def c2c_noise_scale(profile: DeviceProfile, n=None):
    """Standard deviation (siemens) of the programming noise for a write.

    In per-pulse mode the per-write sigma is split across the N pulses of a
    full-range write and accumulates as ``sqrt(n)``.
    """
    base = profile.c2c_sigma * (profile.g_max - profile.g_min)
    if profile.c2c_mode is C2CMode.PER_WRITE or n is None:
        return base
    return base * np.sqrt(np.asarray(n, dtype=np.float64) / profile.n_steps)


def apply_c2c_noise(g, profile: DeviceProfile, noise_draw, n=None):
    """Perturb a programmed conductance by one cycle-to-cycle draw, clipped to range."""
    scale = c2c_noise_scale(profile, n)
    out = np.clip(
        np.asarray(g, dtype=np.float64) + np.asarray(noise_draw) * scale,
        profile.g_min,
        profile.g_max,
    )
    return out[()] if out.ndim == 0 else out


_TABLE = {
    DeviceKind.AgSi: dict(states=97, nl_potentiation=2.4, nl_depression=-4.88,
                          r_on=26e6, memory_window=12.5, c2c_sigma=0.035),
    DeviceKind.TaOxHfOx: dict(states=128, nl_potentiation=0.04, nl_depression=-0.63,
                              r_on=100e3, memory_window=10.0, c2c_sigma=0.037),
    DeviceKind.AlOxHfO2: dict(states=40, nl_potentiation=1.94, nl_depression=-0.61,
                              r_on=16.9e3, memory_window=4.43, c2c_sigma=0.05),
    DeviceKind.EpiRAM: dict(states=64, nl_potentiation=0.5, nl_depression=-0.5,
                            r_on=81e3, memory_window=50.2, c2c_sigma=0.02),
}

_ALIASES = {
    "agsi": DeviceKind.AgSi,
    "taoxhfox": DeviceKind.TaOxHfOx,
    "aloxhfo2": DeviceKind.AlOxHfO2,
    "epiram": DeviceKind.EpiRAM,
}

PRESET_NAMES = tuple(k.value for k in DeviceKind)


def device_kind(name) -> DeviceKind:
    if isinstance(name, DeviceKind):
        return name
    try:
        return DeviceKind(name)
    except ValueError:
        pass
    try:
        return DeviceKind[name]
    except KeyError:
        pass
    key = "".join(ch for ch in str(name).lower() if ch.isalnum())
    if key in _ALIASES:
        return _ALIASES[key]
    raise KeyError(f"unknown device preset {name!r}; expected one of {', '.join(PRESET_NAMES)}")


def preset(kind) -> DeviceProfile:
    kind = device_kind(kind)
    return DeviceProfile(name=kind.value, **_TABLE[kind])
