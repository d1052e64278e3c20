import math

import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from rramvmm.device import (ConductanceLadder, C2CMode, DeviceKind, DeviceProfile,
                            apply_c2c_noise, c2c_noise_scale, ladder_conductance,
                            normalized_ladder, preset, target_state_for_weight)

# (1 - e^-1.2) / (1 - e^-2.4), evaluated with mpmath at 40 digits
HALF_LADDER_NU_2_4 = 0.7685247834990176


@pytest.mark.parametrize("kind, expected", [
    ("EpiRAM", dict(states=64, nl_potentiation=0.5, nl_depression=-0.5, r_on=81e3,
                    memory_window=50.2, c2c_sigma=0.02)),
    ("Ag:a-Si", dict(states=97, nl_potentiation=2.4, nl_depression=-4.88, r_on=26e6,
                     memory_window=12.5, c2c_sigma=0.035)),
    ("AlOx/HfO2", dict(states=40, nl_potentiation=1.94, nl_depression=-0.61, r_on=16.9e3,
                       memory_window=4.43, c2c_sigma=0.05)),
    ("TaOx/HfOx", dict(states=128, nl_potentiation=0.04, nl_depression=-0.63, r_on=100e3,
                       memory_window=10.0, c2c_sigma=0.037)),
])
def test_presets_match_table(kind, expected):
    p = preset(kind)
    for key, value in expected.items():
        assert getattr(p, key) == value
    assert p.c2c_mode is C2CMode.PER_WRITE
    assert p.name == kind


def test_preset_lookup_by_enum_and_alias():
    assert preset(DeviceKind.AgSi) == preset("Ag:a-Si") == preset("AgSi")
    assert preset("TaOxHfOx").name == "TaOx/HfOx"
    assert preset("AlOxHfO2").name == "AlOx/HfO2"
    with pytest.raises(KeyError):
        preset("NbOx")


def test_profile_invariants():
    p = preset("EpiRAM")
    assert 0 < p.g_min < p.g_max
    assert p.g_max == 1 / 81e3
    with pytest.raises(ValueError):
        p.with_(states=1)
    with pytest.raises(ValueError):
        p.with_(memory_window=1.0)
    with pytest.raises(ValueError):
        p.with_(r_on=0.0)
    with pytest.raises(ValueError):
        p.with_(c2c_sigma=1.5)


def test_infinite_memory_window_means_zero_off_state():
    p = preset("EpiRAM").with_(memory_window=math.inf)
    assert p.g_min == 0.0


def _ladder(nu, n_steps=96, g_min=1e-6, g_max=1e-5):
    return ConductanceLadder(n_steps, g_min, g_max, nu)


def test_linear_ladder_endpoints():
    lad = _ladder(0.0)
    assert ladder_conductance(0, lad) == lad.g_min
    assert ladder_conductance(lad.n_steps, lad) == lad.g_max


def test_half_ladder_value_against_high_precision():
    lad = _ladder(2.4)
    g = ladder_conductance(48, lad)
    expected = lad.g_min + HALF_LADDER_NU_2_4 * (lad.g_max - lad.g_min)
    assert g == pytest.approx(expected, rel=1e-13)
    assert normalized_ladder(48, 96, 2.4) == pytest.approx(0.76853, abs=1e-5)


def test_ladder_rejects_out_of_range_step():
    with pytest.raises(ValueError):
        ladder_conductance(97, _ladder(1.0))
    with pytest.raises(ValueError):
        ladder_conductance(-1, _ladder(1.0))


@settings(max_examples=60, deadline=None)
@given(nu=st.floats(-10, 10), n_steps=st.integers(1, 2047))
@example(nu=5e-324, n_steps=2)
def test_ladder_strictly_monotone_with_exact_endpoints(nu, n_steps):
    lad = ConductanceLadder(n_steps, 2e-6, 1e-4, nu)
    g = lad.levels()
    assert np.all(np.diff(g) > 0)
    assert abs(g[0] - lad.g_min) <= 1e-12 * lad.g_max
    assert abs(g[-1] - lad.g_max) <= 1e-12 * lad.g_max


def test_ladder_continuous_in_nu():
    n = np.arange(97)
    assert np.max(np.abs(normalized_ladder(n, 96, 1e-9) - n / 96)) < 1e-8


@pytest.mark.parametrize("u, n_steps, expected", [(1.0, 96, 96), (0.0, 96, 0), (0.3, 96, 29),
                                                  (0.5, 1, 1), (0.25, 2, 1)])
def test_target_state(u, n_steps, expected):
    assert target_state_for_weight(u, n_steps) == expected


def test_target_state_rejects_out_of_range():
    with pytest.raises(ValueError):
        target_state_for_weight(1.01, 10)
    with pytest.raises(ValueError):
        target_state_for_weight(-0.1, 10)


def test_zero_noise_is_identity():
    p = preset("Ag:a-Si").with_(c2c_sigma=0.0)
    g = 0.5 * (p.g_min + p.g_max)
    assert apply_c2c_noise(g, p, 3.7) == g


def test_noise_clips_at_bounds():
    p = preset("Ag:a-Si")
    assert apply_c2c_noise(p.g_max, p, 0.8) == p.g_max
    assert apply_c2c_noise(p.g_min, p, -0.8) == p.g_min


def test_noise_std_and_mean_monte_carlo():
    p = preset("Ag:a-Si").with_(memory_window=100.0)
    g_mid = 0.5 * (p.g_min + p.g_max)
    draws = np.random.default_rng(7).standard_normal(100_000)
    out = apply_c2c_noise(np.full(draws.shape, g_mid), p, draws)
    target = 0.035 * (p.g_max - p.g_min)
    assert abs(out.std() / target - 1) < 0.02
    assert abs(out.mean() - g_mid) < 3 * out.std() / math.sqrt(out.size)


def test_per_pulse_noise_scale():
    p = preset("EpiRAM").with_(c2c_mode="per_pulse")
    full = 0.02 * (p.g_max - p.g_min)
    assert c2c_noise_scale(p, p.n_steps) == pytest.approx(full)
    assert c2c_noise_scale(p, 0) == 0.0
    assert c2c_noise_scale(p, p.n_steps / 4) == pytest.approx(full / 2)


def test_profile_dict_round_trip():
    p = preset("AlOx/HfO2").with_(c2c_mode=C2CMode.PER_PULSE)
    assert DeviceProfile.from_dict(p.to_dict()) == p
