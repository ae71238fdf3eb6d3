"""Angles, chords and boundary arc sets on the unit circle.

Angles are floats in [0, 1); the point of angle r is exp(2 i pi r).  A chord is
stored with its endpoints sorted.  Boundary arcs are (start, end) pairs read
counter-clockwise; an empty arc tuple stands for the whole circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.spatial import cKDTree

TWO_PI = 2.0 * math.pi

Arcs = tuple  # tuple[tuple[float, float], ...]


def wrap(r: float) -> float:
    r = r % 1.0
    return 0.0 if r == 1.0 else r


class Chord(NamedTuple):
    a: float
    b: float

    @classmethod
    def of(cls, x: float, y: float) -> "Chord":
        x, y = wrap(x), wrap(y)
        return cls(x, y) if x <= y else cls(y, x)

    @property
    def degenerate(self) -> bool:
        return self.a == self.b

    def endpoints_xy(self) -> np.ndarray:
        return to_xy(np.array([self.a, self.b]))


def to_xy(r) -> np.ndarray:
    """Cartesian coordinates of angles, shape (..., 2)."""
    r = np.asarray(r, dtype=float)
    return np.stack([np.cos(TWO_PI * r), np.sin(TWO_PI * r)], axis=-1)


def cross(c1: Chord, c2: Chord) -> bool:
    """True when the open segments of two chords intersect."""
    a, b = c1
    p, q = c2
    if a == b or p == q:
        return False
    if p == a or p == b or q == a or q == b:
        return False
    return (a < p < b) != (a < q < b)


def is_noncrossing(chords: Iterable[Chord]) -> bool:
    """Laminar-interval check in O(k log k)."""
    intervals = sorted(((c[0], -c[1]) for c in chords if c[0] != c[1]))
    stack: list[tuple[float, float]] = []
    for a, nb in intervals:
        b = -nb
        while stack and stack[-1][1] <= a:
            stack.pop()
        if stack and b > stack[-1][1] and a > stack[-1][0]:
            return False
        stack.append((a, b))
    return True


# boundary arcs ---------------------------------------------------------------

def arc_length(s: float, e: float) -> float:
    return (e - s) % 1.0


def arcs_mass(arcs: Arcs) -> float:
    if not arcs:
        return 1.0
    return math.fsum((e - s) % 1.0 for s, e in arcs)


def locate_arc(arcs: Arcs, p: float) -> int:
    """Index of the arc holding p strictly inside, -1 if none."""
    for i, (s, e) in enumerate(arcs):
        d = (p - s) % 1.0
        if 0.0 < d < (e - s) % 1.0:
            return i
    return -1


def arcs_contains(arcs: Arcs, p: float) -> bool:
    return not arcs or locate_arc(arcs, p) >= 0


def arcs_point(arcs: Arcs, offset: float) -> float | None:
    """Point at arc-length offset from the first arc start.

    Returns None when rounding lands on an arc endpoint, so callers can redraw.
    """
    if not arcs:
        return wrap(offset)
    for s, e in arcs:
        length = (e - s) % 1.0
        if offset < length:
            p = s + offset
            if p >= 1.0:
                p -= 1.0
            d = (p - s) % 1.0
            return p if 0.0 < d < length else None
        offset -= length
    return None


def split_arcs(arcs: Arcs, x: float, y: float) -> tuple[Arcs, Arcs]:
    """Cut a boundary by the chord [x, y].

    Returns (A, B) where A is the part read counter-clockwise from x to y.
    Both feet must lie strictly inside arcs of the boundary.
    """
    if not arcs:
        return ((x, y),), ((y, x),)
    i = locate_arc(arcs, x)
    k = locate_arc(arcs, y)
    if i < 0 or k < 0:
        raise ValueError("foot not in fragment")
    rot = arcs[i:] + arcs[:i]
    k = (k - i) % len(arcs)
    s0, e0 = rot[0]
    if k == 0:
        if (y - s0) % 1.0 > (x - s0) % 1.0:
            return ((x, y),), ((y, e0),) + rot[1:] + ((s0, x),)
        return ((x, e0),) + rot[1:] + ((s0, y),), ((y, x),)
    sk, ek = rot[k]
    return ((x, e0),) + rot[1:k] + ((sk, y),), ((y, ek),) + rot[k + 1:] + ((s0, x),)


def boundary_chords(arcs: Arcs) -> list[Chord]:
    """Chords closing the gaps between consecutive arcs."""
    n = len(arcs)
    return [Chord.of(arcs[i][1], arcs[(i + 1) % n][0]) for i in range(n)]


@dataclass(frozen=True)
class ArcSet:
    """Finite union of half-open circular arcs; empty means the full circle."""

    arcs: Arcs = ()

    @property
    def full(self) -> bool:
        return not self.arcs

    @property
    def mass(self) -> float:
        return arcs_mass(self.arcs)

    @property
    def ends(self) -> int:
        return len(self.arcs)

    def contains(self, p: float) -> bool:
        return arcs_contains(self.arcs, p)

    def point(self, offset: float) -> float | None:
        return arcs_point(self.arcs, offset)

    def split(self, x: float, y: float) -> tuple["ArcSet", "ArcSet"]:
        a, b = split_arcs(self.arcs, x, y)
        return ArcSet(a), ArcSet(b)


# Hausdorff distance ----------------------------------------------------------

def sample_chords(chords: Sequence[Chord], spacing: float) -> np.ndarray:
    """Points along every chord, consecutive points at most `spacing` apart."""
    if len(chords) == 0:
        return np.empty((0, 2))
    ends = to_xy(np.asarray(chords, dtype=float))
    p, q = ends[:, 0], ends[:, 1]
    lengths = np.linalg.norm(q - p, axis=1)
    counts = np.ceil(lengths / spacing).astype(int) + 1
    idx = np.repeat(np.arange(len(chords)), counts)
    start = np.repeat(np.cumsum(counts) - counts, counts)
    frac = (np.arange(counts.sum()) - start) / np.maximum(counts[idx] - 1, 1)
    return p[idx] + frac[:, None] * (q[idx] - p[idx])


def chord_set_hausdorff(A: Sequence[Chord], B: Sequence[Chord], resolution: float = 1e-3,
                        with_circle: bool = False) -> float:
    """Hausdorff distance between unions of chords in the closed disk.

    Each chord is discretized with spacing resolution * diameter; the error is
    at most that spacing.  With with_circle the unit circle is added to both
    sets, which then may hold no chords at all.
    """
    if not with_circle and (len(A) == 0 or len(B) == 0):
        raise ValueError("empty chord set")
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    spacing = 2.0 * resolution
    pa, pb = sample_chords(A, spacing), sample_chords(B, spacing)
    if with_circle:
        ring = _circle_points(spacing)
        pa, pb = np.vstack([pa, ring]), np.vstack([pb, ring])
    dab = cKDTree(pb).query(pa)[0].max()
    dba = cKDTree(pa).query(pb)[0].max()
    return float(max(dab, dba))


def _circle_points(spacing: float) -> np.ndarray:
    n = int(math.ceil(TWO_PI / spacing))
    return to_xy(np.arange(n) / n)
