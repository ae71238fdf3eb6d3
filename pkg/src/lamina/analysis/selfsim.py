"""Distributional self-similarity of the separating-mass sum.

Z_t = sum of m**beta* over the fragments separating 1 from exp(2 i pi t) at
horizon T.  Conditioning on the first chord, with sorted feet U1 < U2 and
split time tau, the fragment holding 1 (mass M = 1 - (U2 - U1)) and the other
one evolve as independent rescaled copies, so Z can be rebuilt from two
copies Z', Z'' run for horizons M**alpha (T - tau) and (U2 - U1)**alpha (T - tau):

    M**b Z'((t) / M)                                     t <= U1
    M**b Z'(U1 / M) + (U2 - U1)**b Z''((t - U1) / (U2 - U1))   U1 < t < U2
    M**b Z'((t - (U2 - U1)) / M)                         t >= U2

With b = beta* the rebuilt values have the law of Z at every T; when tau > T
there is no chord and Z = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Sequence

import numpy as np
from scipy import stats

from ..engine import BETA_STAR, EngineConfig, simulate
from ..parallel import map_replicas
from ..rng import KeyedStream


def _z_values(seed: int, alpha: float, horizon: float, points: Sequence[float]) -> list[float]:
    if horizon <= 0 or not points:
        return [1.0] * len(points)
    r = simulate(EngineConfig(alpha=alpha, t_max=horizon, seed=seed, prune=True),
                 [(0.0, x) for x in points])
    return [math.fsum(m ** BETA_STAR for m in ms) for ms in r.final_separating]


def _direct(seed, alpha, T, ts):
    return _z_values(seed, alpha, T, ts)


def branch(t: float, u1: float, u2: float) -> int:
    """0: before the first foot, 1: between the feet, 2: after."""
    if t <= u1:
        return 0
    if t < u2:
        return 1
    return 2


def _composed(seed, alpha, T, ts, exponent):
    rs = KeyedStream.named(seed, "composition")
    tau = rs.exponential()
    if tau > T:
        return [1.0] * len(ts)
    a, b = rs.random(), rs.random()
    u1, u2 = min(a, b), max(a, b)
    inner = u2 - u1
    m = 1.0 - inner
    rest = T - tau
    outer_pts, inner_pts, plan = [], [], []
    for t in ts:
        k = branch(t, u1, u2)
        if k == 0:
            plan.append((0, len(outer_pts), None))
            outer_pts.append(t / m)
        elif k == 2:
            plan.append((0, len(outer_pts), None))
            outer_pts.append((t - inner) / m)
        else:
            plan.append((1, len(outer_pts), len(inner_pts)))
            outer_pts.append(u1 / m)
            inner_pts.append((t - u1) / inner)
    # the two copies get seeds that no direct replica uses
    z1 = _z_values(_copy_seed(seed, 1), alpha, m ** alpha * rest, outer_pts)
    z2 = _z_values(_copy_seed(seed, 2), alpha, inner ** alpha * rest, inner_pts)
    wm, wi = m ** exponent, inner ** exponent
    out = []
    for k, i, j in plan:
        out.append(wm * z1[i] + (wi * z2[j] if k == 1 else 0.0))
    return out


def _copy_seed(seed: int, which: int) -> int:
    return (seed << 2 | which) + (1 << 62)


@dataclass
class SelfSimilarityResult:
    times: tuple[float, ...]
    ks_stat: tuple[float, ...]
    pvalue: tuple[float, ...]
    direct: np.ndarray
    composed: np.ndarray

    def passed(self, level: float = 0.01) -> bool:
        """Bonferroni: every p-value above level / number of times."""
        return min(self.pvalue) > level / len(self.times)


def self_similarity_test(T: float = 400.0, grid: Sequence[float] = (0.3, 0.5, 0.7),
                         replicas: int = 10_000, seed: int = 0, alpha: float = 2.0,
                         exponent: float = BETA_STAR, threads: int | None = None) -> SelfSimilarityResult:
    """Two-sample KS between direct and rebuilt Z at each grid time."""
    ts = [float(t) for t in grid]
    direct_seeds = [seed + i for i in range(replicas)]
    comp_seeds = [seed + replicas + i for i in range(replicas)]
    a = np.array(map_replicas(partial(_direct, alpha=alpha, T=T, ts=ts), direct_seeds, threads))
    b = np.array(map_replicas(partial(_composed, alpha=alpha, T=T, ts=ts, exponent=exponent),
                              comp_seeds, threads))
    res = [stats.ks_2samp(a[:, k], b[:, k]) for k in range(len(ts))]
    return SelfSimilarityResult(tuple(ts), tuple(float(r.statistic) for r in res),
                                tuple(float(r.pvalue) for r in res), a, b)
