"""Binary self-similar fragmentations of mass.

A particle of mass m lives an exponential time of rate m**alpha, then splits
into masses s1*m and s2*m with (s1, s2) drawn from a dislocation law.  Two
built-in laws matter for laminations: the conservative law of the uniform
chord split (NU_C) and the dissipative law of separating fragments (NU_D).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .engine import BETA_STAR

Sampler = Callable[[np.random.Generator, int], np.ndarray]


def _sample_nu_c(gen: np.random.Generator, size: int) -> np.ndarray:
    u = 0.5 + 0.5 * gen.random(size)
    return np.stack([u, 1.0 - u], axis=1)


def _sample_nu_d(gen: np.random.Generator, size: int) -> np.ndarray:
    # a cut point U; each side of it survives iff it holds X1 or X2
    u, x1, x2 = gen.random((3, size))
    left = (x1 < u) | (x2 < u)
    right = (x1 > u) | (x2 > u)
    a = np.where(left, u, 0.0)
    b = np.where(right, 1.0 - u, 0.0)
    return np.stack([np.maximum(a, b), np.minimum(a, b)], axis=1)


@dataclass(frozen=True)
class DislocationMeasure:
    """Law of the ranked pair (s1, s2) of relative child masses."""

    kind: str
    sampler: Sampler
    closed_kappa: Callable[[float], float] | None = None
    conservative: bool = False

    def sample(self, gen: np.random.Generator, size: int = 1) -> np.ndarray:
        s = np.asarray(self.sampler(gen, size), dtype=float).reshape(size, 2)
        return s

    @classmethod
    def custom(cls, sampler: Callable[[np.random.Generator], tuple[float, float]],
               kappa: Callable[[float], float] | None = None,
               conservative: bool = False, check: bool = True) -> "DislocationMeasure":
        def vector(gen, size):
            out = np.array([sampler(gen) for _ in range(size)], dtype=float).reshape(size, 2)
            if check:
                validate_pairs(out)
            return out
        return cls("Custom", vector, kappa, conservative)


def validate_pairs(s: np.ndarray) -> None:
    s1, s2 = s[:, 0], s[:, 1]
    if np.any(s1 >= 1) or np.any(s1 < s2) or np.any(s2 < 0) or np.any(s1 + s2 > 1 + 1e-12):
        raise ValueError("dislocation sample outside 1 > s1 >= s2 >= 0, s1 + s2 <= 1")


NU_C = DislocationMeasure("NuC", _sample_nu_c, lambda p: (p - 1.0) / (p + 1.0), conservative=True)
NU_D = DislocationMeasure("NuD", _sample_nu_d, lambda p: (p * p + 3.0 * p - 2.0) / (p * p + 5.0 * p + 6.0))


def sample_dislocation(m: DislocationMeasure, gen: np.random.Generator) -> tuple[float, float]:
    s1, s2 = m.sample(gen, 1)[0]
    return float(s1), float(s2)


def _power(s: np.ndarray, p: float) -> np.ndarray:
    # 0**0 = 0 convention
    with np.errstate(divide="ignore"):
        return np.where(s > 0, np.power(s, p), 0.0)


@dataclass
class KappaFn:
    """kappa(p) = E[1 - s1**p - s2**p] under the dislocation law.

    In Monte Carlo mode the same samples are reused for every p, which keeps
    the estimate monotone in p.
    """

    measure: DislocationMeasure
    samples: int | None = None
    seed: int = 0
    block: int = 1 << 16
    _cache: np.ndarray | None = field(default=None, repr=False)

    @property
    def closed(self) -> bool:
        return self.samples is None and self.measure.closed_kappa is not None

    def draws(self) -> np.ndarray:
        if self._cache is None:
            n = self.samples or 10 ** 6
            blocks = []
            for i, start in enumerate(range(0, n, self.block)):
                gen = np.random.default_rng([self.seed, i])
                blocks.append(self.measure.sample(gen, min(self.block, n - start)))
            self._cache = np.concatenate(blocks)
        return self._cache

    def __call__(self, p: float) -> float:
        return self.evaluate(p)[0]

    def evaluate(self, p: float) -> tuple[float, float]:
        """(value, standard error); the error is 0 in closed form."""
        if p < 0:
            raise ValueError("kappa needs p >= 0")
        if self.closed:
            return float(self.measure.closed_kappa(p)), 0.0
        s = self.draws()
        v = 1.0 - _power(s[:, 0], p) - _power(s[:, 1], p)
        return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))


def kappa(m: DislocationMeasure | KappaFn, p: float) -> float:
    k = m if isinstance(m, KappaFn) else KappaFn(m)
    return k(p)


def malthusian(k: DislocationMeasure | KappaFn | Callable[[float], float], tol: float = 1e-12) -> float:
    """Root of kappa by bisection."""
    if isinstance(k, DislocationMeasure):
        k = KappaFn(k)
    if k(0.0) >= 0:
        raise ValueError("measure violates hypothesis (H): kappa(0) >= 0")
    lo, hi = 0.0, 1.0
    while k(hi) <= 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise ValueError("kappa never becomes positive")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if k(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass
class FragState:
    time: float
    masses: np.ndarray  # ranked nonincreasing

    @property
    def n_particles(self) -> int:
        return len(self.masses)


def power_sum(s: FragState, p: float) -> float:
    if p < 0:
        raise ValueError("p must be >= 0")
    return float(math.fsum(_power(s.masses, p)))


def malthusian_martingale(s: FragState, p_star: float) -> float:
    if p_star <= 0:
        raise ValueError("p_star must be > 0")
    return power_sum(s, p_star)


def run_fragmentation(alpha: float, m: DislocationMeasure, t_max: float, seed,
                      record_at: Sequence[float], mass_floor: float = 1e-15) -> list[FragState]:
    """Event-queue simulation from a single particle of mass 1."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    times = sorted(float(t) for t in record_at)
    if times and (times[0] < 0 or times[-1] > t_max):
        raise ValueError("record times must lie in [0, t_max]")
    gen = np.random.default_rng(seed)
    pool = _DrawPool(gen, m)
    heap: list[tuple[float, float]] = []
    frozen: list[float] = []

    def push(mass, birth):
        if mass < mass_floor:
            frozen.append(mass)
            return
        e = pool.exp()
        heapq.heappush(heap, (birth + (e if alpha == 0 else e * mass ** -alpha), mass))

    push(1.0, 0.0)
    out = []
    ti = 0
    while heap and ti < len(times):
        ts, mass = heap[0]
        while ti < len(times) and times[ti] < ts:
            out.append(_state(times[ti], heap, frozen))
            ti += 1
        if ti == len(times):
            break
        heapq.heappop(heap)
        s1, s2 = pool.split()
        if s1 > 0:
            push(s1 * mass, ts)
        if s2 > 0:
            push(s2 * mass, ts)
    while ti < len(times):
        out.append(_state(times[ti], heap, frozen))
        ti += 1
    return out


def _state(t: float, heap, frozen) -> FragState:
    ms = np.fromiter((m for _, m in heap), dtype=float, count=len(heap))
    if frozen:
        ms = np.concatenate([ms, frozen])
    return FragState(t, np.sort(ms)[::-1])


class _DrawPool:
    """Buffered exponential and dislocation draws."""

    def __init__(self, gen: np.random.Generator, m: DislocationMeasure, size: int = 4096):
        self.gen, self.m, self.size = gen, m, size
        self._e: list[float] = []
        self._s: list[tuple[float, float]] = []

    def exp(self) -> float:
        if not self._e:
            self._e = self.gen.standard_exponential(self.size).tolist()
        return self._e.pop()

    def split(self) -> tuple[float, float]:
        if not self._s:
            self._s = [tuple(r) for r in self.m.sample(self.gen, self.size).tolist()]
        return self._s.pop()


def snapshot_row(s: FragState, p_star: float, top: int = 8) -> list[float]:
    head = list(s.masses[:top]) + [0.0] * max(0, top - len(s.masses))
    return [s.time, s.n_particles, float(math.fsum(s.masses)), power_sum(s, p_star)] + head


SNAPSHOT_COLUMNS = ["time", "n_particles", "sum_mass", "sum_mass_pstar"] + [f"mass_{i + 1}" for i in range(8)]

__all__ = [
    "BETA_STAR", "DislocationMeasure", "FragState", "KappaFn", "NU_C", "NU_D",
    "kappa", "malthusian", "malthusian_martingale", "power_sum", "run_fragmentation",
    "sample_dislocation", "snapshot_row", "SNAPSHOT_COLUMNS", "validate_pairs",
]
