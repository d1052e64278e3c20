"""Central-moment summaries of error samples."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class MomentSummary:
    """Uncorrected moment estimators; ``nan`` marks an undefined shape statistic."""

    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    n: int

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    @property
    def shape_defined(self) -> bool:
        return not (math.isnan(self.skewness) or math.isnan(self.excess_kurtosis))

    def to_dict(self) -> dict:
        def clean(v):
            return None if math.isnan(v) else float(v)

        return {
            "n": self.n,
            "mean": float(self.mean),
            "variance": float(self.variance),
            "skewness": clean(self.skewness),
            "excess_kurtosis": clean(self.excess_kurtosis),
        }


def moments(samples) -> MomentSummary:
    x = np.asarray(samples, dtype=np.float64).ravel()
    n = x.shape[0]
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {n}")
    mean = x.mean()
    d = x - mean
    d2 = d * d
    m2 = d2.mean()
    if m2 == 0.0:
        return MomentSummary(float(mean), 0.0, math.nan, math.nan, n)
    m3 = (d2 * d).mean()
    m4 = (d2 * d2).mean()
    return MomentSummary(float(mean), float(m2), float(m3 / m2**1.5), float(m4 / (m2 * m2) - 3.0), n)
