"""One-dimensional Gaussian mixtures fitted by expectation-maximization."""
from __future__ import annotations

import numpy as np

from .. import kernels
from .distributions import DistributionFit, Family, FitError, ks_statistic
from .moments import InsufficientDataError

TOL = 1e-8
MAX_ITER = 500
RESTARTS = 5
COLLAPSE = 1e-12


class _Collapsed(Exception):
    pass


def _em(x, w, m, s, floor, tol, max_iter):
    """Run EM from (w, m, s); returns params and the per-iteration log-likelihoods."""
    n = x.shape[0]
    history = []
    for _ in range(max_iter):
        ll, nk, mu, var = kernels.em_step(x, w, m, s)
        history.append(ll)
        if len(history) > 1 and abs(ll - history[-2]) < tol * abs(history[-2]):
            break
        if np.any(~(nk > 0)):
            raise _Collapsed
        with np.errstate(invalid="ignore"):
            w, m, s = nk / n, mu, np.sqrt(var)
        if np.any(~(s >= floor)):
            raise _Collapsed
    else:
        history.append(kernels.em_step(x, w, m, s)[0])
    return w, m, s, history


def _starts(x, k, restarts, rng):
    std = x.std()
    yield np.full(k, 1.0 / k), np.quantile(x, (np.arange(k) + 0.5) / k), np.full(k, std / k)
    for _ in range(restarts - 1):
        means = rng.choice(x, size=k, replace=False)
        yield np.full(k, 1.0 / k), means + rng.normal(0.0, 0.1 * std / k, size=k), np.full(k, std)


def fit_gaussian_mixture(samples, k: int, *, restarts: int = RESTARTS, seed: int = 0,
                         tol: float = TOL, max_iter: int = MAX_ITER) -> DistributionFit:
    """Maximum-likelihood k-component normal mixture (best of ``restarts`` EM runs).

    A restart whose component standard deviation collapses below
    ``1e-12 * range`` is discarded; if every restart collapses the fit is
    redone with ``k - 1`` components and flagged ``pruned``.
    """
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.shape[0] < 2 * k:
        raise InsufficientDataError(f"{x.shape[0]} samples are too few for {k} components")
    span = float(np.ptp(x))
    if span == 0.0:
        raise FitError("constant samples have no normal mixture MLE")
    floor = COLLAPSE * span
    rng = np.random.default_rng(seed)
    best = None
    for w0, m0, s0 in _starts(x, k, restarts, rng):
        try:
            w, m, s, hist = _em(x, w0, m0, s0, floor, tol, max_iter)
        except _Collapsed:
            continue
        if best is None or hist[-1] > best[3][-1]:
            best = (w, m, s, hist)
    if best is None:
        if k == 1:
            raise FitError("single normal component collapsed")
        fit = fit_gaussian_mixture(x, k - 1, restarts=restarts, seed=seed, tol=tol,
                                   max_iter=max_iter)
        flags = tuple(sorted(set(fit.flags) | {"pruned"}))
        return DistributionFit(fit.family, fit.params, fit.log_likelihood, fit.n, fit.ks_stat,
                               flags, fit.history)
    w, m, s, hist = best
    order = np.argsort(m, kind="stable")
    w = w[order] / w[order].sum()
    params = {"weights": w.tolist(), "means": m[order].tolist(), "stds": s[order].tolist()}
    fit = DistributionFit(Family.NORMAL_MIXTURE, params, hist[-1], x.shape[0], history=tuple(hist))
    return fit.with_ks(ks_statistic(x, fit))
