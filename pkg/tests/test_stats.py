import math

import numpy as np
import pytest
from scipy import integrate

from rramvmm.stats import (FitConvergenceError, FitError, InsufficientDataError, fit_gaussian_mixture,
                           fit_johnson_su, fit_shash, ks_statistic, moments, select_best_fit)
from rramvmm.stats.distributions import DistributionFit, Family, johnson_su_sample, shash_sample
from rramvmm.stats.select import SelectionError


def _two_pass(x):
    n = len(x)
    mean = math.fsum(x) / n
    d = [v - mean for v in x]
    m2 = math.fsum(v * v for v in d) / n
    m3 = math.fsum(v**3 for v in d) / n
    m4 = math.fsum(v**4 for v in d) / n
    return mean, m2, m3 / m2**1.5, m4 / m2**2 - 3


# ---------------------------------------------------------------- moments

def test_moments_two_points():
    s = moments([-1.0, 1.0])
    assert (s.mean, s.variance, s.skewness, s.excess_kurtosis, s.n) == (0.0, 1.0, 0.0, -2.0, 2)


def test_moments_constant_samples_mark_shape_undefined():
    s = moments([3.0] * 10)
    assert s.variance == 0.0 and not s.shape_defined
    assert s.to_dict()["skewness"] is None


def test_moments_insufficient():
    with pytest.raises(InsufficientDataError):
        moments([1.0])


def test_moments_normal_monte_carlo():
    s = moments(np.random.default_rng(0).standard_normal(10**6))
    assert abs(s.skewness) < 0.01 and abs(s.excess_kurtosis) < 0.02


@pytest.mark.parametrize("seed", [0, 1])
def test_moments_against_two_pass_oracle(seed):
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.gamma(2.0, 1.5, 60_000), rng.normal(4, 0.2, 40_000)]) + 1e3
    oracle = _two_pass(x.tolist())
    s = moments(x)
    for got, want in zip((s.mean, s.variance, s.skewness, s.excess_kurtosis), oracle):
        assert got == pytest.approx(want, rel=1e-12, abs=1e-12)
    assert s.excess_kurtosis >= s.skewness**2 - 2


# ---------------------------------------------------------------- mixtures

def test_single_normal_recovers_moments():
    x = np.random.default_rng(1).normal(2.0, 3.0, 10**5)
    fit = fit_gaussian_mixture(x, 1)
    assert abs(fit.params["means"][0] - 2) < 0.05 and abs(fit.params["stds"][0] - 3) < 0.05
    assert fit.params["means"][0] == pytest.approx(x.mean(), rel=1e-9)
    assert fit.params["stds"][0] == pytest.approx(x.std(), rel=1e-9)


def test_single_normal_two_points():
    fit = fit_gaussian_mixture([0.0, 2.0], 1)
    assert fit.params["means"] == [1.0] and fit.params["stds"] == [1.0]


def test_two_component_recovery_and_invariants():
    rng = np.random.default_rng(2)
    x = np.concatenate([rng.normal(-5, 1, 5000), rng.normal(5, 1, 5000)])
    fit = fit_gaussian_mixture(x, 2)
    w, m = fit.params["weights"], fit.params["means"]
    assert all(abs(v - 0.5) < 0.02 for v in w)
    assert abs(m[0] + 5) < 0.1 and abs(m[1] - 5) < 0.1
    assert m == sorted(m)
    assert abs(sum(w) - 1) < 1e-10 and min(w) > 0 and min(fit.params["stds"]) > 0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_em_log_likelihood_nondecreasing(k):
    x = np.random.default_rng(k).standard_t(5, 4000)
    fit = fit_gaussian_mixture(x, k)
    hist = np.asarray(fit.history)
    assert np.all(np.diff(hist) >= -1e-12 * np.abs(hist[:-1]))
    assert fit.log_likelihood == hist[-1]


def test_mixture_degenerate_component_is_pruned():
    x = np.repeat([0.0, 1.0, 2.0], 30)
    fit = fit_gaussian_mixture(x, 3)
    assert "pruned" in fit.flags and fit.k < 3


def test_mixture_rejects_bad_inputs():
    with pytest.raises(ValueError):
        fit_gaussian_mixture(np.arange(10.0), 4)
    with pytest.raises(InsufficientDataError):
        fit_gaussian_mixture([1.0, 2.0, 3.0], 2)
    with pytest.raises(FitError):
        fit_gaussian_mixture(np.ones(50), 1)


# ---------------------------------------------------------------- sinh families

JSU_TRUE = dict(gamma=0.0, delta=1.0, xi=0.0, lam=1.0)
SHASH_TRUE = dict(mu=0.0, sigma=1.0, epsilon=0.5, tau=1.2)


@pytest.fixture(scope="module")
def jsu_data():
    return johnson_su_sample(np.random.default_rng(3), 10**5, **JSU_TRUE)


@pytest.fixture(scope="module")
def shash_data():
    return shash_sample(np.random.default_rng(4), 10**5, **SHASH_TRUE)


def test_johnson_su_recovery(jsu_data):
    p = fit_johnson_su(jsu_data).params
    assert abs(p["gamma"]) < 0.05  # true value 0: absolute reading of the 5% band
    assert abs(p["xi"]) < 0.05
    assert p["delta"] == pytest.approx(1.0, rel=0.05)
    assert p["lambda"] == pytest.approx(1.0, rel=0.05)


def test_johnson_su_symmetric_family_has_no_skew(jsu_data):
    fit = fit_johnson_su(jsu_data)
    draws = fit.sample(10**6, np.random.default_rng(5))
    # delta near 1 gives heavy tails, so test the quantile skewness (Bowley) as well
    q1, q2, q3 = np.quantile(draws, [0.25, 0.5, 0.75])
    assert abs((q3 + q1 - 2 * q2) / (q3 - q1)) < 0.05
    assert abs(fit.params["gamma"]) < 0.05


def test_johnson_su_location_equivariance(jsu_data):
    base = fit_johnson_su(jsu_data).params
    shifted = fit_johnson_su(jsu_data + 3.25).params
    assert shifted["xi"] - base["xi"] == pytest.approx(3.25, abs=1e-6)
    for key in ("gamma", "delta", "lambda"):
        assert shifted[key] == pytest.approx(base[key], abs=1e-6)


def test_shash_recovery(shash_data):
    p = fit_shash(shash_data).params
    assert abs(p["mu"]) < 0.05
    for key in ("sigma", "epsilon", "tau"):
        assert p[key] == pytest.approx(SHASH_TRUE[key], rel=0.05)


def test_shash_reduces_to_normal():
    p = fit_shash(np.random.default_rng(6).standard_normal(10**5)).params
    assert abs(p["epsilon"]) < 0.05 and abs(p["tau"] - 1) < 0.05


def test_shash_scale_equivariance(shash_data):
    base = fit_shash(shash_data).params
    scaled = fit_shash(shash_data * 2.5).params
    assert scaled["sigma"] == pytest.approx(2.5 * base["sigma"], abs=1e-6)
    assert scaled["mu"] == pytest.approx(2.5 * base["mu"], abs=1e-6)
    assert scaled["epsilon"] == pytest.approx(base["epsilon"], abs=1e-6)
    assert scaled["tau"] == pytest.approx(base["tau"], abs=1e-6)


def test_sinh_fits_need_fifty_samples():
    with pytest.raises(InsufficientDataError):
        fit_johnson_su(np.arange(49.0))
    with pytest.raises(InsufficientDataError):
        fit_shash(np.arange(49.0))


def test_nonconvergence_carries_best_iterate():
    # light-tailed data puts the Johnson Su MLE on the boundary delta -> inf
    x = np.random.default_rng(7).uniform(-1, 1, 5000)
    try:
        fit_johnson_su(x)
    except FitConvergenceError as exc:
        assert isinstance(exc.best, DistributionFit)
        assert math.isfinite(exc.best.log_likelihood)


# ---------------------------------------------------------------- KS, densities, AIC

def _normal_fit(mean=0.0, std=1.0, n=1):
    return DistributionFit(Family.NORMAL_MIXTURE, {"weights": [1.0], "means": [mean],
                                                    "stds": [std]}, 0.0, n)


def test_ks_examples():
    fit = _normal_fit()
    assert ks_statistic(np.full(100, 10.0), fit) == pytest.approx(1.0, abs=1e-12)
    x = np.random.default_rng(8).standard_normal(10**5)
    assert ks_statistic(x, fit) <= 0.01
    assert ks_statistic(x, fit) == ks_statistic(x.copy(), fit)
    assert 0.0 <= ks_statistic(x[:10], fit) <= 1.0


def _fitted(jsu_data, shash_data):
    mix = np.random.default_rng(9).standard_t(4, 3000)
    return [fit_gaussian_mixture(mix, 1), fit_gaussian_mixture(mix, 2),
            fit_gaussian_mixture(mix, 3), fit_johnson_su(jsu_data[:5000]),
            fit_shash(shash_data[:5000])], mix


def test_densities_integrate_to_one_and_aic_identity(jsu_data, shash_data):
    fits, mix = _fitted(jsu_data, shash_data)
    for fit, data in zip(fits, [mix, mix, mix, jsu_data[:5000], shash_data[:5000]]):
        sd = data.std()
        lo, hi = data.min() - 10 * sd, data.max() + 10 * sd
        total, _ = integrate.quad(fit.pdf, lo, hi, limit=400, epsabs=1e-10, epsrel=1e-10)
        # the bounded window itself omits a sliver of the heavy Johnson Su tail
        tail = fit.cdf(np.array([lo]))[0] + 1 - fit.cdf(np.array([hi]))[0]
        assert abs(total + tail - 1) < 1e-6
        assert abs(total - 1) < 1e-3
        assert fit.aic == 2 * fit.n_params - 2 * fit.log_likelihood
        assert 0 <= fit.ks_stat <= 1
        assert fit.log_likelihood == pytest.approx(float(np.sum(fit.logpdf(data))), rel=1e-9)


# ---------------------------------------------------------------- selection

def test_selection_prefers_normal_on_normal_data():
    best = select_best_fit(np.random.default_rng(0).standard_normal(32000), threads=4)
    assert best.label == "Normal"


def test_selection_prefers_mixture_on_bimodal_data():
    rng = np.random.default_rng(1)
    x = np.concatenate([rng.normal(-5, 1, 16000), rng.normal(5, 1, 16000)])
    best = select_best_fit(x, threads=4)
    assert best.family is Family.NORMAL_MIXTURE and best.k >= 2


def test_selection_deterministic_and_minimal():
    x = shash_sample(np.random.default_rng(10), 3000, 0.0, 1.0, 0.6, 0.8)
    best, results = select_best_fit(x, return_all=True)
    again = select_best_fit(x, threads=3)
    assert best.label == again.label and best.aic == again.aic
    fits = [r for r in results.values() if isinstance(r, DistributionFit)]
    assert best.aic == min(f.aic for f in fits)


def test_selection_errors():
    with pytest.raises(InsufficientDataError):
        select_best_fit(np.arange(149.0))
    with pytest.raises(SelectionError):
        select_best_fit(np.zeros(200))
