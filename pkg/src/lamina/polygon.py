"""Discrete triangulations of the regular n-gon.

Vertex k (1 <= k <= n) sits at angle k/n.  Two samplers are provided: the
recursive one, which at every step picks a diagonal uniformly among all
diagonals that cross none already drawn, and the permutation-matching one,
which reveals vertices in a random order and joins each new vertex to a free
vertex of its face when that makes a diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .coding import check_triangulation as _check_chords
from .geometry import Chord
from .lamination import Figela


def vertex_angle(k: int, n: int) -> float:
    return (k % n) / n


def diagonal_chord(i: int, j: int, n: int) -> Chord:
    return Chord.of(vertex_angle(i, n), vertex_angle(j, n))


def is_diagonal(i: int, j: int, n: int) -> bool:
    """True when vertices i and j are distinct and not adjacent."""
    d = (i - j) % n
    return d not in (0, 1, n - 1)


def n_diagonals(m: int) -> int:
    return m * (m - 3) // 2 if m > 3 else 0


@dataclass
class PolygonState:
    n: int
    diagonals: list[tuple[int, int]] = field(default_factory=list)
    faces: list[list[int]] = field(default_factory=list)

    @property
    def chords(self) -> list[Chord]:
        return [diagonal_chord(i, j, self.n) for i, j in self.diagonals]

    def exact_feet(self) -> list[tuple[Fraction, Fraction]]:
        return [(Fraction(i % self.n, self.n), Fraction(j % self.n, self.n)) for i, j in self.diagonals]


class _Fenwick:
    def __init__(self, size: int):
        self.tree = [0] * (size + 1)
        self.size = size

    def add(self, i: int, delta: int) -> None:
        i += 1
        while i <= self.size:
            self.tree[i] += delta
            i += i & -i

    def find(self, r: int) -> tuple[int, int]:
        """Slot i with prefix(i) <= r < prefix(i + 1), and r - prefix(i)."""
        pos, step = 0, 1 << self.size.bit_length()
        while step:
            nxt = pos + step
            if nxt <= self.size and self.tree[nxt] <= r:
                pos = nxt
                r -= self.tree[nxt]
            step >>= 1
        return pos, r


def _decode_diagonal(m: int, r: int) -> tuple[int, int]:
    """r-th diagonal (0-based) of an m-gon with local vertices 0..m-1."""
    for i in range(m - 2):
        count = (m - 3) if i == 0 else (m - 2 - i)
        if r < count:
            return i, i + 2 + r
        r -= count
    raise IndexError(r)


def sample_uniform_recursive(n: int, seed) -> PolygonState:
    """Triangulation built by n - 3 uniform noncrossing diagonal draws."""
    if n < 4:
        raise ValueError("n must be >= 4")
    gen = np.random.default_rng(seed)
    faces: list[list[int]] = [list(range(1, n + 1))]
    fen = _Fenwick(max(n - 2, 1))
    fen.add(0, n_diagonals(n))
    total = n_diagonals(n)
    diagonals = []
    for _ in range(n - 3):
        slot, r = fen.find(int(gen.integers(total)))
        face = faces[slot]
        m = len(face)
        i, j = _decode_diagonal(m, r)
        a, b = face[: i + 1] + face[j:], face[i: j + 1]
        diagonals.append((face[i], face[j]))
        faces[slot] = a
        faces.append(b)
        fen.add(slot, n_diagonals(len(a)) - n_diagonals(m))
        fen.add(len(faces) - 1, n_diagonals(len(b)))
        total += n_diagonals(len(a)) + n_diagonals(len(b)) - n_diagonals(m)
    return PolygonState(n, diagonals, faces)


class UniquenessViolation(RuntimeError):
    """A revealed vertex could be joined to more than one free vertex."""


@dataclass
class MatchingState:
    n: int
    sigma: list[int]
    diagonals: list[tuple[int, int]] = field(default_factory=list)
    free: set[int] = field(default_factory=set)
    # steps at which several free vertices were eligible
    violations: list[int] = field(default_factory=list)
    n_free: list[int] = field(default_factory=list)
    n_matched: list[int] = field(default_factory=list)

    @property
    def chords(self) -> list[Chord]:
        return [diagonal_chord(i, j, self.n) for i, j in self.diagonals]


def sample_permutation_matching(n: int, seed, strict: bool = True,
                                sigma: list[int] | None = None) -> MatchingState:
    """Reveal vertices in a uniform random order, matching when possible.

    When the revealed vertex forms a diagonal with several free vertices of
    its face, strict mode raises UniquenessViolation; otherwise the free
    vertex revealed first is used and the step is logged.
    """
    if n < 4:
        raise ValueError("n must be >= 4")
    if sigma is None:
        sigma = (np.random.default_rng(seed).permutation(n) + 1).tolist()
    if sorted(sigma) != list(range(1, n + 1)):
        raise ValueError("sigma must be a permutation of 1..n")
    st = MatchingState(n, list(sigma))
    fig = Figela()
    # free vertices of each face, in reveal order
    free: dict[str, list[int]] = {"": []}
    n_free = 0
    for step, v in enumerate(sigma, start=1):
        face = fig.locate(vertex_angle(v, n))
        cands = [w for w in free[face] if is_diagonal(v, w, n)]
        if len(cands) > 1:
            if strict:
                raise UniquenessViolation(f"step {step}: vertex {v} sees free vertices {cands}")
            st.violations.append(step)
        if cands:
            w = cands[0]
            c0, c1 = fig.insert_chord(face, vertex_angle(w, n), vertex_angle(v, n), float(step))
            rest = free.pop(face)
            rest.remove(w)
            free[c0], free[c1] = [], []
            for x in rest:
                free[fig.locate(vertex_angle(x, n))].append(x)
            st.diagonals.append((w, v))
            n_free -= 1
        else:
            free[face].append(v)
            n_free += 1
        st.n_matched.append(len(st.diagonals))
        st.n_free.append(n_free)
    st.free = {x for f in free.values() for x in f}
    return st


def check_triangulation(diagonals: list[tuple[int, int]], n: int) -> bool:
    """Triangulation check for vertex-index pairs; see coding.check_triangulation."""
    for i, j in diagonals:
        if not is_diagonal(i, j, n):
            raise ValueError(f"({i}, {j}) is not a diagonal of the {n}-gon")
    return _check_chords([diagonal_chord(i, j, n) for i, j in diagonals], n)
