"""Box-counting dimension of finite chord sets, plus a covering diagnostic."""

from __future__ import annotations

from typing import Sequence

import math

import numpy as np

from ..geometry import Chord, sample_chords
from ..lamination import Figela


def occupied_cells(points: np.ndarray, eps: float) -> int:
    cells = np.floor((points + 1.0) / eps).astype(np.int64)
    width = int(np.ceil(2.0 / eps)) + 2
    return len(np.unique(cells[:, 0] * width + cells[:, 1]))


def box_counts(chords: Sequence[Chord], scales: Sequence[float]) -> np.ndarray:
    out = []
    for eps in scales:
        out.append(occupied_cells(sample_chords(chords, eps / 4.0), eps))
    return np.array(out)


def box_dimension(chords: Sequence[Chord], scales: Sequence[float]) -> tuple[float, np.ndarray]:
    """Slope of log N(eps) against log(1/eps) over the given cell sizes."""
    scales = np.asarray(sorted(set(float(s) for s in scales), reverse=True))
    if len(scales) < 2 or np.any(scales <= 0):
        raise ValueError("need at least two distinct positive scales")
    if len(chords) == 0:
        raise ValueError("no chords")
    counts = box_counts(chords, scales)
    slope = np.polyfit(np.log(1.0 / scales), np.log(counts), 1)[0]
    return float(slope), counts


def default_scales(finest: float = 1e-3, coarsest: float = 0.1, n: int = 8) -> np.ndarray:
    return np.geomspace(coarsest, finest, n)


def covering_sum(f: Figela, x: float, gamma: float, y: float = 0.0) -> float:
    """2**(1 + gamma) E**2 sum of eta_i**(gamma - 1) over fragments separating y from x.

    eta_i = 2 pi m_i is the boundary length of a separating fragment and E is
    the largest number of ends among live fragments.  This bounds the
    gamma-power sum of a disk covering of the chords joining the two arcs cut
    out by x and y; for gamma above the dimension it tends to 0 along the
    alpha = 0 process.  Diagnostic only.
    """
    if gamma <= 1:
        raise ValueError("gamma must be > 1")
    ends = max(fr.ends for fr in f.fragments.values())
    eta = [2 * math.pi * fr.mass for fr in f.separating_fragments(y, x)]
    return 2.0 ** (1 + gamma) * ends ** 2 * math.fsum(e ** (gamma - 1) for e in eta)
