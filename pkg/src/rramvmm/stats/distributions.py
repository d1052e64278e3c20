"""Parametric families used to describe VMM error populations.

Johnson Su:  ``Z = gamma + delta * asinh((x - xi) / lam)`` is standard normal.
SHASH:       ``Z = sinh(tau * asinh((x - mu) / sigma) - epsilon)`` is standard normal.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp, ndtr

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG2 = math.log(2.0)


class Family(str, enum.Enum):
    NORMAL_MIXTURE = "NormalMixture"
    JOHNSON_SU = "JohnsonSu"
    SHASH = "Shash"


class FitError(RuntimeError):
    pass


class FitConvergenceError(FitError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def _log_cosh(u):
    return np.logaddexp(u, -u) - _LOG2


def mixture_logpdf(x, weights, means, stds):
    x = np.asarray(x, dtype=np.float64)[..., None]
    w, m, s = (np.asarray(a, dtype=np.float64) for a in (weights, means, stds))
    z = (x - m) / s
    return logsumexp(np.log(w) - np.log(s) - LOG_SQRT_2PI - 0.5 * z * z, axis=-1)


def mixture_cdf(x, weights, means, stds):
    x = np.asarray(x, dtype=np.float64)[..., None]
    return (np.asarray(weights) * ndtr((x - np.asarray(means)) / np.asarray(stds))).sum(axis=-1)


def johnson_su_logpdf(x, gamma, delta, xi, lam):
    z = (np.asarray(x, dtype=np.float64) - xi) / lam
    r = gamma + delta * np.arcsinh(z)
    return math.log(delta) - math.log(lam) - LOG_SQRT_2PI - 0.5 * np.log1p(z * z) - 0.5 * r * r


def johnson_su_cdf(x, gamma, delta, xi, lam):
    return ndtr(gamma + delta * np.arcsinh((np.asarray(x, dtype=np.float64) - xi) / lam))


def johnson_su_sample(rng, n, gamma, delta, xi, lam):
    return xi + lam * np.sinh((rng.standard_normal(n) - gamma) / delta)


def shash_logpdf(x, mu, sigma, epsilon, tau):
    z = (np.asarray(x, dtype=np.float64) - mu) / sigma
    u = tau * np.arcsinh(z) - epsilon
    s = np.sinh(u)
    return (math.log(tau) - math.log(sigma) - LOG_SQRT_2PI + _log_cosh(u)
            - 0.5 * np.log1p(z * z) - 0.5 * s * s)


def shash_cdf(x, mu, sigma, epsilon, tau):
    z = (np.asarray(x, dtype=np.float64) - mu) / sigma
    return ndtr(np.sinh(tau * np.arcsinh(z) - epsilon))


def shash_sample(rng, n, mu, sigma, epsilon, tau):
    return mu + sigma * np.sinh((np.arcsinh(rng.standard_normal(n)) + epsilon) / tau)


@dataclass(frozen=True, eq=False)
class DistributionFit:
    """A fitted parametric model of a sample.

    ``params`` layout: mixtures ``weights/means/stds`` (lists, sorted by mean);
    Johnson Su ``gamma/delta/xi/lambda``; SHASH ``mu/sigma/epsilon/tau``.
    """

    family: Family
    params: dict
    log_likelihood: float
    n: int
    ks_stat: float = math.nan
    flags: tuple = ()
    history: tuple = field(default=(), repr=False)

    @property
    def k(self) -> int | None:
        if self.family is Family.NORMAL_MIXTURE:
            return len(self.params["weights"])
        return None

    @property
    def n_params(self) -> int:
        if self.family is Family.NORMAL_MIXTURE:
            return 3 * self.k - 1
        return 4

    @property
    def aic(self) -> float:
        return 2.0 * self.n_params - 2.0 * self.log_likelihood

    @property
    def bic(self) -> float:
        return self.n_params * math.log(self.n) - 2.0 * self.log_likelihood

    @property
    def label(self) -> str:
        if self.family is Family.NORMAL_MIXTURE:
            return "Normal" if self.k == 1 else f"Normal-{self.k}-Mixture"
        return "Johnson Su" if self.family is Family.JOHNSON_SU else "SHASH"

    def _args(self):
        p = self.params
        if self.family is Family.NORMAL_MIXTURE:
            return p["weights"], p["means"], p["stds"]
        if self.family is Family.JOHNSON_SU:
            return p["gamma"], p["delta"], p["xi"], p["lambda"]
        return p["mu"], p["sigma"], p["epsilon"], p["tau"]

    def logpdf(self, x):
        fn = {Family.NORMAL_MIXTURE: mixture_logpdf, Family.JOHNSON_SU: johnson_su_logpdf,
              Family.SHASH: shash_logpdf}[self.family]
        return fn(x, *self._args())

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def cdf(self, x):
        fn = {Family.NORMAL_MIXTURE: mixture_cdf, Family.JOHNSON_SU: johnson_su_cdf,
              Family.SHASH: shash_cdf}[self.family]
        return fn(x, *self._args())

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.family is Family.JOHNSON_SU:
            return johnson_su_sample(rng, n, *self._args())
        if self.family is Family.SHASH:
            return shash_sample(rng, n, *self._args())
        w, m, s = (np.asarray(a) for a in self._args())
        comp = rng.choice(len(w), size=n, p=w)
        return m[comp] + s[comp] * rng.standard_normal(n)

    def with_ks(self, ks: float) -> DistributionFit:
        return DistributionFit(self.family, self.params, self.log_likelihood, self.n, float(ks),
                               self.flags, self.history)

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "label": self.label,
            "params": self.params,
            "n_params": self.n_params,
            "log_likelihood": self.log_likelihood,
            "aic": self.aic,
            "bic": self.bic,
            "ks_stat": self.ks_stat,
            "flags": list(self.flags),
        }


def ks_statistic(samples, fit: DistributionFit) -> float:
    """Sup-norm distance between the empirical CDF and the fitted CDF."""
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    n = x.shape[0]
    if n == 0:
        return 0.0
    F = fit.cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
