"""Laminations coded by nonnegative functions on [0, 1].

Two times s < t are identified when g(s) = g(t) and g stays above that level
in between; the coded lamination is the union of the chords joining
identified times.  Functions are handled as samples on a grid with linear
interpolation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import Chord, is_noncrossing
from .lamination import Figela


@dataclass
class CodingFunction:
    t: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        if self.t.ndim != 1 or self.t.shape != self.g.shape or len(self.t) < 2:
            raise ValueError("t and g must be 1-d arrays of equal length >= 2")
        if self.t[0] != 0.0 or self.t[-1] != 1.0 or np.any(np.diff(self.t) <= 0):
            raise ValueError("t must increase strictly from 0 to 1")
        if self.g[0] != 0.0 or self.g[-1] != 0.0 or np.any(self.g < 0):
            raise ValueError("g must be nonnegative and vanish at both ends")

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "CodingFunction":
        """Samples on the uniform grid k / (len - 1)."""
        v = np.asarray(values, dtype=float)
        return cls(np.linspace(0.0, 1.0, len(v)), v)

    def __call__(self, s):
        return np.interp(s, self.t, self.g)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "g"])
            for a, b in zip(self.t.tolist(), self.g.tolist()):
                w.writerow([repr(a), repr(b)])

    @classmethod
    def from_csv(cls, path) -> "CodingFunction":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0] != ["t", "g"]:
            raise ValueError(f"{path}:1: expected header t,g")
        data = np.array([[float(x) for x in r] for r in rows[1:]])
        return cls(data[:, 0], data[:, 1])


def pseudo_distance(g: CodingFunction, s: float, t: float) -> float:
    """g(s) + g(t) - 2 min of g over [s, t], exact for the interpolant."""
    lo, hi = min(s, t), max(s, t)
    gs, gt = float(g(s)), float(g(t))
    i, j = np.searchsorted(g.t, [lo, hi], side="right")
    inner = g.g[i:j]
    m = min(gs, gt, float(inner.min())) if len(inner) else min(gs, gt)
    return gs + gt - 2.0 * m


def identified_pairs(values: np.ndarray, tol: float = 0.0) -> list[tuple[int, int]]:
    """Index pairs i < j - 1 with |g_i - g_j| <= tol and g > max(g_i, g_j) strictly in between.

    Found with a monotone stack in linear time; the pairs never interleave.
    """
    g = np.asarray(values, dtype=float).tolist()
    stack: list[int] = []
    out = []
    for j, gj in enumerate(g):
        while stack and g[stack[-1]] > gj:
            i = stack.pop()
            if j - i >= 2 and g[i] - gj <= tol:
                out.append((i, j))
        if stack:
            i = stack[-1]
            if j - i >= 2 and gj - g[i] <= tol:
                out.append((i, j))
            if g[i] == gj:
                stack.pop()
        stack.append(j)
    out.sort()
    return out


def adaptive_tol(g: CodingFunction) -> float:
    """Twice the largest increment between neighbouring samples."""
    return 2.0 * float(np.abs(np.diff(g.g)).max())


@dataclass
class CodedChordSet:
    chords: list[Chord]
    pairs: list[tuple[int, int]]


def code_lamination(g: CodingFunction, tol: float = 0.0) -> CodedChordSet:
    """Chords between identified grid times.

    With tol = 0 exact level ties are required, which is right for integer
    paths and for functions that are constant on whole fragments.
    """
    if tol < 0:
        raise ValueError("tol must be >= 0")
    last = len(g.t) - 1
    pairs = [(i, j) for i, j in identified_pairs(g.g, tol) if not (i == 0 and j == last)]
    # t = 1 wraps onto t = 0, so two pairs can give the same chord
    chords = list(dict.fromkeys(Chord.of(g.t[i], g.t[j]) for i, j in pairs))
    chords = [c for c in chords if not c.degenerate]
    return CodedChordSet(chords, pairs)


def sample_excursion(steps: int, seed) -> CodingFunction:
    """Uniform Dyck path of the given length, rescaled to [0, 1].

    A uniform arrangement of n up-steps and n + 1 down-steps is rotated to
    start just after its first minimum (cycle lemma); dropping the final
    down-step leaves a uniform Dyck path.
    """
    if steps < 2 or steps % 2:
        raise ValueError("steps must be even and >= 2")
    n = steps // 2
    gen = np.random.default_rng(seed)
    seq = np.concatenate([np.ones(n, dtype=np.int64), -np.ones(n + 1, dtype=np.int64)])
    gen.shuffle(seq)
    walk = np.cumsum(seq)
    k = int(np.argmin(walk)) + 1
    seq = np.concatenate([seq[k:], seq[:k]])[:-1]
    heights = np.concatenate([[0], np.cumsum(seq)])
    return CodingFunction(np.arange(steps + 1) / steps, heights / math.sqrt(steps))


def dyck_matching(heights: Sequence[int]) -> list[tuple[int, int]]:
    """Up-step i matched with down-step j, reported as path points (i, j + 1)."""
    stack, out = [], []
    for i in range(len(heights) - 1):
        if heights[i + 1] > heights[i]:
            stack.append(i)
        else:
            out.append((stack.pop(), i + 1))
    return sorted(out)


def figela_coding_function(f: Figela, n_grid: int, p: float) -> CodingFunction:
    """Grid of r -> sum of m**p over fragments separating angle 0 from r.

    Fragments are summed along the dual tree from the fragment holding angle
    0, so grid points in the same fragment get identical values.  The
    endpoint values are set to 0.
    """
    tree = f.dual_tree()
    cum = {tree.root: f.fragments[tree.root].mass ** p}
    order = [tree.root]
    for u in order:
        for v in tree.adjacency[u]:
            if v not in cum:
                cum[v] = cum[u] + f.fragments[v].mass ** p
                order.append(v)
    t = np.arange(n_grid + 1) / n_grid
    g = np.array([cum[f._gap_owner(r)] for r in t[:-1]] + [0.0])
    g[0] = 0.0
    return CodingFunction(t, g)


def check_triangulation(chords: Sequence[Chord], n: int) -> bool:
    """True iff noncrossing chords with feet on the n-grid triangulate the n-gon.

    Polygon sides are ignored.  Raises ValueError on crossings or off-grid
    feet.
    """
    seen = set()
    for c in chords:
        i, j = round(c.a * n), round(c.b * n)
        if abs(c.a * n - i) > 1e-6 or abs(c.b * n - j) > 1e-6:
            raise ValueError(f"chord {c} has a foot off the {n}-grid")
        i, j = i % n, j % n
        if (i - j) % n in (0, 1, n - 1):
            continue
        seen.add((min(i, j), max(i, j)))
    if not is_noncrossing(list(chords)):
        raise ValueError("crossing chords")
    return len(seen) == max(n - 3, 0)
