"""Monte Carlo estimators built on the chord-splitting engine.

Replica i of a run with master seed s uses engine seed s + i.  Functions named
`_replica_*` are top-level so that replicas can be fanned out to processes.
"""

from __future__ import annotations

import logging
import math
from functools import partial
from typing import Sequence

import numpy as np
from scipy.special import gamma as gamma_fn

from ..engine import BETA_STAR, EngineConfig, simulate
from ..parallel import map_replicas
from ..rng import KeyedStream
from .stats import StatSeries, mean_stderr

log = logging.getLogger(__name__)


def m1_closed_form(u, beta: float = BETA_STAR):
    """Gamma(2 + 2b) / Gamma(1 + b)**2 * (u (1 - u))**b."""
    u = np.asarray(u, dtype=float)
    return gamma_fn(2 + 2 * beta) / gamma_fn(1 + beta) ** 2 * (u * (1 - u)) ** beta


def h1_closed_form(r):
    return 8.0 / math.pi * np.sqrt(np.asarray(r, dtype=float) * (1 - np.asarray(r, dtype=float)))


def _seeds(seed: int, replicas: int) -> list[int]:
    return [seed + i for i in range(replicas)]


def uniform_point(seed: int) -> float:
    """The uniform query point V of replica `seed`, independent of its chords."""
    return KeyedStream.named(seed, "query-point").random()


# counts -----------------------------------------------------------------------

def _replica_counts(seed, alpha, times):
    r = simulate(EngineConfig(alpha=alpha, t_max=times[-1], seed=seed, record_snapshots_at=times))
    return [s.n_chords for s in r.snapshots]


def chord_counts(alpha: float, times: Sequence[float], replicas: int, seed: int,
                 threads: int | None = None) -> np.ndarray:
    """#S_alpha(t) for every replica (rows) and time (columns)."""
    times = sorted(float(t) for t in times)
    fn = partial(_replica_counts, alpha=alpha, times=times)
    return np.array(map_replicas(fn, _seeds(seed, replicas), threads), dtype=float)


# separating masses at fixed points ------------------------------------------------

def _replica_sep_sums(seed, alpha, T, points, p):
    r = simulate(EngineConfig(alpha=alpha, t_max=T, seed=seed, prune=True), [(0.0, x) for x in points])
    sums = [math.fsum(m ** p for m in ms) for ms in r.final_separating]
    biggest = max((ms[0] for ms in r.final_separating if ms), default=0.0)
    return sums, biggest


def estimate_m1(r_grid: Sequence[float], T: float, alpha: float, replicas: int, seed: int,
                threads: int | None = None, p: float = BETA_STAR) -> list[tuple[float, float, float]]:
    """(r, mean, stderr) of sum of m**p over fragments separating 1 from exp(2 i pi r)."""
    r_grid = [float(r) for r in r_grid]
    if any(not 0 < r < 1 for r in r_grid):
        raise ValueError("r must lie in (0, 1)")
    fn = partial(_replica_sep_sums, alpha=alpha, T=T, points=r_grid, p=p)
    out = map_replicas(fn, _seeds(seed, replicas), threads)
    sums = np.array([o[0] for o in out])
    biggest = max(o[1] for o in out)
    if biggest > 0.05:
        log.warning("largest separating mass %.3g > 0.05: T may be too small", biggest)
    m, s = mean_stderr(sums)
    return list(zip(r_grid, m.tolist(), s.tolist()))


def _replica_uniform(seed, alpha, times, p):
    v = uniform_point(seed)
    r = simulate(EngineConfig(alpha=alpha, t_max=times[-1], seed=seed, prune=True,
                              record_snapshots_at=times), [(0.0, v)])
    return [(s.power_sums(p)[0], s.heights[0]) for s in r.snapshots]


def uniform_point_samples(alpha: float, times: Sequence[float], replicas: int, seed: int,
                          threads: int | None = None, p: float = BETA_STAR) -> tuple[np.ndarray, np.ndarray]:
    """Power sums and heights for the chord [1, exp(2 i pi V)], V uniform.

    Returns two arrays of shape (replicas, len(times)).
    """
    times = sorted(float(t) for t in times)
    fn = partial(_replica_uniform, alpha=alpha, times=times, p=p)
    out = np.array(map_replicas(fn, _seeds(seed, replicas), threads), dtype=float)
    return out[:, :, 0], out[:, :, 1]


def martingale_uniform(alpha: float, times: Sequence[float], replicas: int, seed: int,
                       threads: int | None = None) -> StatSeries:
    """E[sum of m**beta* over fragments separating 1 from V], equal to 1 at every time."""
    sums, _ = uniform_point_samples(alpha, times, replicas, seed, threads)
    return StatSeries.from_samples(sorted(times), sums, seed, f"M_T(V), alpha={alpha}")


def height_martingale_uniform(times: Sequence[float], replicas: int, seed: int,
                              threads: int | None = None) -> StatSeries:
    """E[exp(-t/3) (H(1, V) + 1)] at alpha = 0, equal to 1 at every time."""
    times = sorted(float(t) for t in times)
    _, h = uniform_point_samples(0.0, times, replicas, seed, threads)
    vals = np.exp(-np.asarray(times) / 3.0) * (h + 1.0)
    return StatSeries.from_samples(times, vals, seed, "exp(-t/3)(H+1)")


# heights at fixed points ----------------------------------------------------------

def _replica_heights(seed, alpha, times, x):
    r = simulate(EngineConfig(alpha=alpha, t_max=times[-1], seed=seed, prune=True,
                              record_snapshots_at=times), [(0.0, x)])
    return [s.heights[0] for s in r.snapshots]


def height_samples(alpha: float, x: float, times: Sequence[float], replicas: int, seed: int,
                   threads: int | None = None) -> np.ndarray:
    times = sorted(float(t) for t in times)
    fn = partial(_replica_heights, alpha=alpha, times=times, x=x)
    return np.array(map_replicas(fn, _seeds(seed, replicas), threads), dtype=float)


def height_series(alpha: float, x: float, times: Sequence[float], replicas: int, seed: int,
                  threads: int | None = None) -> StatSeries:
    times = sorted(float(t) for t in times)
    h = height_samples(alpha, x, times, replicas, seed, threads)
    return StatSeries.from_samples(times, h, seed, f"H(1, {x}), alpha={alpha}")


def estimate_h1(r: float, t: float, replicas: int, seed: int,
                threads: int | None = None) -> tuple[float, float]:
    """Mean and stderr of exp(-t/3) H_{S_0(t)}(1, exp(2 i pi r))."""
    if t > 12:
        raise ValueError("t <= 12 keeps the alpha = 0 process tractable")
    h = height_samples(0.0, r, [t], replicas, seed, threads)[:, 0]
    m, s = mean_stderr(math.exp(-t / 3.0) * h)
    return float(m), float(s)
