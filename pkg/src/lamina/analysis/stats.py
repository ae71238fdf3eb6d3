from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass
class StatSeries:
    """Replica means of a statistic along a time axis."""

    t: np.ndarray
    value: np.ndarray
    stderr: np.ndarray
    replicas: int
    seed: int | None = None
    label: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        if np.any(self.stderr < 0):
            raise ValueError("negative standard error")
        if np.any(np.diff(self.t) < 0):
            raise ValueError("series times must be sorted")

    @classmethod
    def from_samples(cls, t: Sequence[float], samples: np.ndarray, seed=None, label="") -> "StatSeries":
        """samples has shape (replicas, len(t))."""
        samples = np.asarray(samples, dtype=float)
        m, s = mean_stderr(samples)
        return cls(np.asarray(t), m, s, samples.shape[0], seed, label)

    def rows(self):
        return zip(self.t.tolist(), self.value.tolist(), self.stderr.tolist())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "mean", "stderr"])
            for row in self.rows():
                w.writerow([repr(x) for x in row])


def mean_stderr(samples: np.ndarray, axis: int = 0) -> tuple[np.ndarray, np.ndarray]:
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[axis]
    m = samples.mean(axis=axis)
    s = samples.std(axis=axis, ddof=1) / math.sqrt(n) if n > 1 else np.zeros_like(m)
    return m, s


def estimate_exponent(series: StatSeries, t_lo: float = -math.inf, t_hi: float = math.inf) -> tuple[float, float]:
    """Weighted least-squares slope of log value against log t.

    Weights are the inverse variances of log value when standard errors are
    available; the returned error is the slope standard error.
    """
    sel = (series.t >= t_lo) & (series.t <= t_hi)
    t, v, s = series.t[sel], series.value[sel], series.stderr[sel]
    if len(t) < 5:
        raise ValueError("need at least 5 points in the fit window")
    if np.any(v <= 0) or np.any(t <= 0):
        raise ValueError("log-log fit needs positive values")
    x, y = np.log(t), np.log(v)
    sig = s / v
    if np.all(sig > 0):
        w = 1.0 / sig ** 2
    else:
        w = np.ones_like(x)
    xm = np.sum(w * x) / np.sum(w)
    ym = np.sum(w * y) / np.sum(w)
    sxx = np.sum(w * (x - xm) ** 2)
    slope = float(np.sum(w * (x - xm) * (y - ym)) / sxx)
    if np.all(sig > 0):
        err = math.sqrt(1.0 / sxx)
    else:
        resid = y - (ym + slope * (x - xm))
        err = math.sqrt(np.sum(resid ** 2) / (len(x) - 2) / sxx)
    return slope, float(err)


def within_sigmas(mean: float, stderr: float, target: float, k: float = 3.0) -> bool:
    return abs(mean - target) <= k * stderr
