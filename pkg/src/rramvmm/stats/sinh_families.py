"""Maximum-likelihood fits of the Johnson Su and sinh-arcsinh (SHASH) families.

Both fitters work on data standardized by (median, IQR/1.349) and optimize
unconstrained parameters (scale and shape positives on a log scale), which
makes the estimates location/scale equivariant by construction.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import optimize

from .distributions import (LOG_SQRT_2PI, DistributionFit, Family, FitConvergenceError, FitError,
                            _log_cosh, ks_statistic)
from .moments import InsufficientDataError

MIN_SAMPLES = 50
STEP_TOL = 1e-9
RESTARTS = 5
_JITTER = 0.3
# bound on every unconstrained (standardized, log-scale) parameter
_MAX_PARAM = 30.0

# BFGS line-search stalls near the optimum are expected; the Newton polish follows.
# A process-wide filter because catch_warnings is not thread-safe.
warnings.filterwarnings("ignore", message="The line search algorithm did not converge",
                        category=RuntimeWarning)


def _in_domain(theta):
    return bool(np.all(np.isfinite(theta)) and np.all(np.abs(theta) < _MAX_PARAM))


def _jsu_nll(theta, y):
    gamma, log_delta, xi, log_lam = theta
    if not _in_domain(theta):
        return math.inf, np.zeros(4)
    delta, lam = math.exp(log_delta), math.exp(log_lam)
    z = (y - xi) / lam
    w = np.arcsinh(z)
    r = gamma + delta * w
    q2 = 1.0 + z * z
    logpdf = log_delta - log_lam - LOG_SQRT_2PI - 0.5 * np.log(q2) - 0.5 * r * r
    dz = -z / q2 - r * delta / np.sqrt(q2)
    grad = np.array([
        np.mean(-r),
        np.mean(1.0 - r * w * delta),
        np.mean(-dz / lam),
        np.mean(-1.0 - z * dz),
    ])
    return -np.mean(logpdf), -grad


def _shash_nll(theta, y):
    mu, log_sigma, eps, log_tau = theta
    if not _in_domain(theta):
        return math.inf, np.zeros(4)
    sigma, tau = math.exp(log_sigma), math.exp(log_tau)
    z = (y - mu) / sigma
    w = np.arcsinh(z)
    u = tau * w - eps
    s = np.sinh(u)
    q2 = 1.0 + z * z
    logpdf = log_tau - log_sigma - LOG_SQRT_2PI + _log_cosh(u) - 0.5 * np.log(q2) - 0.5 * s * s
    du = np.tanh(u) - s * np.cosh(u)
    dz = du * tau / np.sqrt(q2) - z / q2
    grad = np.array([
        np.mean(-dz / sigma),
        np.mean(-1.0 - z * dz),
        np.mean(-du),
        np.mean(1.0 + tau * w * du),
    ])
    return -np.mean(logpdf), -grad


def _hessian(fun, theta, y, h=1e-5):
    k = theta.shape[0]
    H = np.empty((k, k))
    for i in range(k):
        e = np.zeros(k)
        e[i] = h
        H[i] = (fun(theta + e, y)[1] - fun(theta - e, y)[1]) / (2 * h)
    return 0.5 * (H + H.T)


def _newton_polish(fun, theta, y, max_iter=50):
    """Newton iterations until the parameter step falls below STEP_TOL."""
    f, g = fun(theta, y)
    for _ in range(max_iter):
        H = _hessian(fun, theta, y)
        try:
            step = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            return theta, f, False
        if not np.all(np.isfinite(step)):
            return theta, f, False
        if np.max(np.abs(step)) < STEP_TOL:
            return theta + step, fun(theta + step, y)[0], True
        t = 1.0
        while t > 1e-6:
            cand = theta + t * step
            fc, gc = fun(cand, y)
            if np.isfinite(fc) and fc <= f + 1e-15 * abs(f):
                break
            t *= 0.5
        else:
            # no descent along the Newton direction: stationary to working precision
            return theta, f, np.max(np.abs(step)) < 1e-6
        theta, f, g = cand, fc, gc
    return theta, f, False


def _standardize(samples):
    x = np.asarray(samples, dtype=np.float64).ravel()
    n = x.shape[0]
    if n < MIN_SAMPLES:
        raise InsufficientDataError(f"need at least {MIN_SAMPLES} samples, got {n}")
    loc = float(np.median(x))
    q75, q25 = np.percentile(x, [75, 25])
    scale = (q75 - q25) / 1.349
    if not scale > 0:
        scale = float(x.std())
    if not scale > 0:
        raise FitError("constant samples cannot be fitted")
    y = (x - loc) / scale
    d = y - y.mean()
    skew_sign = float(np.sign(np.mean(d**3)))
    return x, y, loc, scale, skew_sign


def _fit(fun, theta0, y, restarts, seed):
    rng = np.random.default_rng(seed)
    starts = [theta0] + [theta0 + rng.normal(0.0, _JITTER, size=4) for _ in range(restarts - 1)]
    best = None
    for start in starts:
        with np.errstate(over="ignore", invalid="ignore"):
            res = optimize.minimize(fun, start, args=(y,), jac=True, method="BFGS",
                                    options={"gtol": 1e-10, "maxiter": 2000})
            if not _in_domain(res.x):
                continue
            theta, f, ok = _newton_polish(fun, res.x, y)
        if not np.isfinite(f):
            continue
        if best is None or (ok and not best[2]) or (ok == best[2] and f < best[1]):
            best = (theta, f, ok)
    return best


def _finish(family, params, mean_nll, n, scale, x, converged):
    ll = -mean_nll * n - n * math.log(scale)
    fit = DistributionFit(family, params, float(ll), n)
    fit = fit.with_ks(ks_statistic(x, fit))
    if not converged:
        raise FitConvergenceError(f"{fit.label} fit did not converge", best=fit)
    return fit


def fit_johnson_su(samples, *, restarts: int = RESTARTS, seed: int = 0) -> DistributionFit:
    x, y, loc, scale, skew_sign = _standardize(samples)
    theta0 = np.array([-0.5 * skew_sign, 0.0, 0.0, 0.0])
    best = _fit(_jsu_nll, theta0, y, restarts, seed)
    if best is None:
        raise FitError("Johnson Su likelihood was not finite at any start")
    (gamma, log_delta, xi, log_lam), f, ok = best
    params = {"gamma": float(gamma), "delta": math.exp(log_delta),
              "xi": loc + scale * float(xi), "lambda": scale * math.exp(log_lam)}
    return _finish(Family.JOHNSON_SU, params, f, x.shape[0], scale, x, ok)


def fit_shash(samples, *, restarts: int = RESTARTS, seed: int = 0) -> DistributionFit:
    x, y, loc, scale, skew_sign = _standardize(samples)
    theta0 = np.array([0.0, 0.0, 0.25 * skew_sign, 0.0])
    best = _fit(_shash_nll, theta0, y, restarts, seed)
    if best is None:
        raise FitError("SHASH likelihood was not finite at any start")
    (mu, log_sigma, eps, log_tau), f, ok = best
    params = {"mu": loc + scale * float(mu), "sigma": scale * math.exp(log_sigma),
              "epsilon": float(eps), "tau": math.exp(log_tau)}
    return _finish(Family.SHASH, params, f, x.shape[0], scale, x, ok)
