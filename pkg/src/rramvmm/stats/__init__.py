"""Moment statistics and parametric fits of error populations."""
from .distributions import (DistributionFit, Family, FitConvergenceError, FitError,
                            johnson_su_sample, ks_statistic, shash_sample)
from .mixture import fit_gaussian_mixture
from .moments import InsufficientDataError, MomentSummary, moments
from .select import SelectionError, fit_candidates, select_best_fit
from .sinh_families import fit_johnson_su, fit_shash

__all__ = [
    "DistributionFit", "Family", "FitConvergenceError", "FitError", "InsufficientDataError",
    "MomentSummary", "SelectionError", "fit_candidates", "fit_gaussian_mixture",
    "fit_johnson_su", "fit_shash", "johnson_su_sample", "ks_statistic", "moments",
    "select_best_fit", "shash_sample",
]
