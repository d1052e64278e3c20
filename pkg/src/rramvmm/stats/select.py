"""AIC model selection across the candidate error families."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .distributions import DistributionFit, FitError
from .mixture import fit_gaussian_mixture
from .moments import InsufficientDataError
from .sinh_families import fit_johnson_su, fit_shash

MIN_SAMPLES = 150

CANDIDATES = {
    "Normal": lambda x, seed: fit_gaussian_mixture(x, 1, seed=seed),
    "Normal-2-Mixture": lambda x, seed: fit_gaussian_mixture(x, 2, seed=seed),
    "Normal-3-Mixture": lambda x, seed: fit_gaussian_mixture(x, 3, seed=seed),
    "Johnson Su": lambda x, seed: fit_johnson_su(x, seed=seed),
    "SHASH": lambda x, seed: fit_shash(x, seed=seed),
}


class SelectionError(FitError):
    def __init__(self, failures: dict):
        detail = "; ".join(f"{k}: {v}" for k, v in failures.items())
        super().__init__(f"every candidate fit failed ({detail})")
        self.failures = failures


def _run(fitter, x, seed):
    try:
        return fitter(x, seed)
    except (FitError, InsufficientDataError, FloatingPointError) as exc:
        return exc


def fit_candidates(samples, seed: int = 0, threads: int = 1) -> dict:
    """Fit every candidate; values are fits or the exception each fitter raised."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {name: pool.submit(_run, f, x, seed) for name, f in CANDIDATES.items()}
            return {name: fut.result() for name, fut in futures.items()}
    return {name: _run(f, x, seed) for name, f in CANDIDATES.items()}


def selection_key(fit: DistributionFit):
    return (fit.aic, fit.n_params, fit.ks_stat)


def select_best_fit(samples, seed: int = 0, *, return_all: bool = False, threads: int = 1):
    """Minimum-AIC fit; ties go to fewer parameters, then the smaller KS distance."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.shape[0] < MIN_SAMPLES:
        raise InsufficientDataError(f"need at least {MIN_SAMPLES} samples, got {x.shape[0]}")
    results = fit_candidates(x, seed, threads)
    fits = [r for r in results.values() if isinstance(r, DistributionFit)]
    if not fits:
        raise SelectionError({k: v for k, v in results.items()})
    best = min(fits, key=selection_key)
    return (best, results) if return_all else best
