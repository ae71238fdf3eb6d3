"""Event-driven simulation of the self-similar chord-splitting process.

Each live fragment of mass m draws its split time at birth as
birth + m**(-alpha) * Exp(1).  At that time two feet are drawn uniformly on
its boundary and the chord between them splits it.  All randomness of a
fragment comes from a key derived from (seed, label), so runs with different
alphas, or runs that skip fragments, see the same chords.

In pruned mode only fragments met by at least one query chord are kept.  This
is exact for heights and separating masses because the dropped fragments
never influence the kept ones.
"""

from __future__ import annotations

import csv
import heapq
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rng as krng
from .geometry import Chord, arcs_point, split_arcs
from .lamination import Figela

BETA_STAR = (math.sqrt(17.0) - 3.0) / 2.0


@dataclass
class EngineConfig:
    alpha: float
    t_max: float | None = None
    chord_budget: int | None = None
    seed: int = 0
    record_snapshots_at: Sequence[float] = ()
    keep_figela: bool = False
    prune: bool = False
    mass_floor: float = 1e-15

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError("alpha must be >= 0")
        if self.t_max is None and self.chord_budget is None:
            raise ValueError("set t_max or chord_budget")
        if self.t_max is not None and not self.t_max >= 0:
            raise ValueError("t_max must be >= 0")
        if self.chord_budget is not None and self.chord_budget < 0:
            raise ValueError("chord_budget must be >= 0")
        times = [float(t) for t in self.record_snapshots_at]
        if any(t < 0 for t in times) or times != sorted(times):
            raise ValueError("snapshot times must be nonnegative and sorted")
        if self.t_max is not None and times and times[-1] > self.t_max:
            raise ValueError("snapshot time beyond t_max")
        self.record_snapshots_at = tuple(times)


@dataclass
class Snapshot:
    time: float
    n_chords: int
    heights: tuple[int, ...]
    separating_masses: tuple[tuple[float, ...], ...]
    figela: Figela | None = None

    def power_sums(self, p: float = BETA_STAR) -> list[float]:
        """sum of m**p over the fragments separating each query pair."""
        return [math.fsum(m ** p for m in ms) for ms in self.separating_masses]


@dataclass
class TrajectoryRecord:
    config: EngineConfig
    queries: tuple[tuple[float, float], ...]
    # (time, a, b, creator label, side0) in time order
    events: list[tuple[float, float, float, str, int]] = field(default_factory=list)
    snapshots: list[Snapshot] = field(default_factory=list)
    partial: bool = False
    frozen: int = 0
    final_time: float = 0.0
    final_heights: tuple[int, ...] = ()
    final_separating: tuple[tuple[float, ...], ...] = ()

    @property
    def n_chords(self) -> int:
        return len(self.events)

    @property
    def chords(self) -> list[Chord]:
        return [Chord(a, b) for _, a, b, _, _ in self.events]

    def chords_until(self, t: float) -> list[Chord]:
        return [Chord(a, b) for s, a, b, _, _ in self.events if s <= t]

    def figela_at(self, t: float | None = None) -> Figela:
        if self.config.prune:
            raise ValueError("a pruned run does not hold the full figela")
        if t is None:
            return Figela.replay(self.events)
        return Figela.replay(e for e in self.events if e[0] <= t)

    def snapshot(self, t: float) -> Snapshot:
        for s in self.snapshots:
            if s.time == t:
                return s
        raise KeyError(t)

    def stats_header(self) -> list[str]:
        return ["time", "n_chords"] + [f"height_{x!r}_{y!r}" for x, y in self.queries]

    def stats_rows(self) -> list[list]:
        """time, chord count and one height per query at every snapshot."""
        return [[s.time, s.n_chords, *s.heights] for s in self.snapshots]

    def to_stats_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.stats_header())
            for row in self.stats_rows():
                w.writerow([repr(x) if isinstance(x, float) else x for x in row])


def simulate(cfg: EngineConfig, height_queries: Sequence[tuple[float, float]] = ()) -> TrajectoryRecord:
    """Run one trajectory up to t_max or chord_budget, whichever comes first."""
    queries = tuple((float(min(x, y)), float(max(x, y))) for x, y in height_queries)
    if cfg.prune and not queries:
        raise ValueError("pruned mode needs at least one height query")
    nq = len(queries)
    alpha = cfg.alpha
    floor = cfg.mass_floor
    prune = cfg.prune
    t_max = math.inf if cfg.t_max is None else cfg.t_max
    budget = math.inf if cfg.chord_budget is None else cfg.chord_budget
    snaps = list(cfg.record_snapshots_at)

    uniform = krng.uniform
    CLOCK, FOOT_A, FOOT_B, COIN = krng.CLOCK, krng.FOOT_A, krng.FOOT_B, krng.COIN
    child_key = krng.child_key
    log1p = math.log1p
    heappush, heappop = heapq.heappush, heapq.heappop

    rec = TrajectoryRecord(cfg, queries)
    events = rec.events
    heights = [0] * nq
    # label -> [arcs, mass, key, query mask]
    live: dict[str, list] = {}
    heap: list[tuple[float, str]] = []
    frozen = 0
    all_mask = (1 << nq) - 1

    def spawn(label, arcs, mass, birth, key, mask):
        nonlocal frozen
        live[label] = [arcs, mass, key, mask]
        if mass < floor:
            frozen += 1
            return
        e = -log1p(-uniform(key, CLOCK))
        heappush(heap, (birth + (e if alpha == 0 else e * mass ** -alpha), label))

    def take_snapshot(t):
        seps = []
        for q in range(nq):
            bit = 1 << q
            seps.append(tuple(sorted((v[1] for v in live.values() if v[3] & bit), reverse=True)))
        fig = Figela.replay(events) if cfg.keep_figela and not prune else None
        rec.snapshots.append(Snapshot(t, len(events), tuple(heights), tuple(seps), fig))

    spawn("", (), 1.0, 0.0, krng.root_key(cfg.seed), all_mask)
    si = 0
    now = 0.0
    while heap:
        ts = heap[0][0]
        while si < len(snaps) and snaps[si] < ts:
            take_snapshot(snaps[si])
            si += 1
        if ts > t_max:
            break
        if len(events) >= budget:
            break
        ts, label = heappop(heap)
        now = ts
        arcs, mass, key, mask = live.pop(label)
        # feet, redrawing on the null event of a rounding collision
        x = arcs_point(arcs, uniform(key, FOOT_A) * mass)
        y = arcs_point(arcs, uniform(key, FOOT_B) * mass)
        k = krng.RETRY
        while x is None or y is None or x == y:
            x = arcs_point(arcs, uniform(key, k) * mass)
            y = arcs_point(arcs, uniform(key, k + 1) * mass)
            k += 2
        lo, hi = (x, y) if x < y else (y, x)
        side0 = 1 if uniform(key, COIN) < 0.5 else 0
        arcs_a, arcs_b = split_arcs(arcs, lo, hi)
        events.append((ts, lo, hi, label, side0))
        mask_a = mask_b = 0
        if mask:
            for q in range(nq):
                bit = 1 << q
                if not mask & bit:
                    continue
                qa, qb = queries[q]
                if qa == lo or qa == hi or qb == lo or qb == hi:
                    raise ValueError("query point is a foot")
                ina = lo < qa < hi
                if ina != (lo < qb < hi):
                    heights[q] += 1
                    mask_a |= bit
                    mask_b |= bit
                elif ina:
                    mask_a |= bit
                else:
                    mask_b |= bit
        if side0:
            arcs_a, arcs_b = arcs_b, arcs_a
            mask_a, mask_b = mask_b, mask_a
        if not prune or mask_a:
            spawn(label + "0", arcs_a, _mass(arcs_a), ts, child_key(key, 0), mask_a)
        if not prune or mask_b:
            spawn(label + "1", arcs_b, _mass(arcs_b), ts, child_key(key, 1), mask_b)

    next_event = heap[0][0] if heap else math.inf
    stopped_by_budget = len(events) >= budget and next_event <= t_max
    while si < len(snaps):
        if snaps[si] < next_event or not stopped_by_budget:
            take_snapshot(snaps[si])
        else:
            rec.partial = True
        si += 1
    if rec.partial:
        warnings.warn("chord budget exhausted before the last snapshot", RuntimeWarning, stacklevel=2)
    rec.frozen = frozen
    rec.final_time = now if stopped_by_budget or not math.isfinite(t_max) else t_max
    rec.final_heights = tuple(heights)
    rec.final_separating = tuple(
        tuple(sorted((v[1] for v in live.values() if v[3] & (1 << q)), reverse=True)) for q in range(nq)
    )
    return rec


def _mass(arcs) -> float:
    m = 0.0
    for s, e in arcs:
        m += (e - s) % 1.0
    return m


def simulate_coupled(alphas: Sequence[float], t_max: float, seed: int,
                     height_queries: Sequence[tuple[float, float]] = (),
                     record_snapshots_at: Sequence[float] = (), prune: bool = False,
                     check: bool = False) -> dict[float, TrajectoryRecord]:
    """Runs sharing one source of randomness, one per alpha.

    Because draws are keyed by fragment label, fragment u is the same set of
    the disk in every run that reaches it; with check=True this is asserted.
    """
    if len(set(alphas)) != len(alphas):
        raise ValueError("alphas must be distinct")
    out = {}
    for a in alphas:
        cfg = EngineConfig(alpha=a, t_max=t_max, seed=seed, prune=prune,
                           record_snapshots_at=record_snapshots_at)
        out[a] = simulate(cfg, height_queries)
    if check and not prune:
        seen: dict[str, tuple] = {}
        for r in out.values():
            for _, a, b, u, side0 in r.events:
                if seen.setdefault(u, (a, b, side0)) != (a, b, side0):
                    raise AssertionError(f"fragment {u!r} differs between coupled runs")
    return out


@dataclass
class RejectionRecord:
    """Chords kept by the rejection model after each proposal."""

    n_proposals: int
    counts: np.ndarray  # counts[k] = chords kept after k + 1 proposals
    figela: Figela

    @property
    def n_chords(self) -> int:
        return len(self.figela)


def simulate_rejection(n_proposals: int, seed: int) -> RejectionRecord:
    """Throw uniform chords one at a time, keeping those that cross nothing."""
    if n_proposals < 0:
        raise ValueError("n_proposals must be >= 0")
    gen = np.random.default_rng(seed)
    pts = gen.random((n_proposals, 2))
    f = Figela()
    counts = np.zeros(n_proposals, dtype=np.int64)
    owner = f._gap_owner
    kept = 0
    for k in range(n_proposals):
        x, y = pts[k]
        u = owner(x)
        if x != y and u == owner(y):
            f.insert_chord(u, float(x), float(y), float(k + 1))
            kept += 1
        counts[k] = kept
    return RejectionRecord(n_proposals, counts, f)
