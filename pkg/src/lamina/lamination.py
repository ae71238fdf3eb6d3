"""Finite laminations made of chords inserted one at a time into fragments.

A fragment is a connected component of the disk minus the chords.  It is named
by a binary word: the root is the empty word and splitting fragment u yields
u0 and u1.  Fragments touch the circle along a finite union of arcs whose
total length is the fragment mass.
"""

from __future__ import annotations

import bisect
import json
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .geometry import (
    Arcs,
    ArcSet,
    Chord,
    arcs_contains,
    arcs_mass,
    arcs_point,
    boundary_chords,
    split_arcs,
    wrap,
)


class Fragment:
    __slots__ = ("id", "arcs", "mass", "birth_time", "parent_chord")

    def __init__(self, id: str, arcs: Arcs, birth_time: float = 0.0,
                 parent_chord: Chord | None = None, mass: float | None = None):
        self.id = id
        self.arcs = arcs
        self.mass = arcs_mass(arcs) if mass is None else mass
        self.birth_time = birth_time
        self.parent_chord = parent_chord

    @property
    def boundary(self) -> ArcSet:
        return ArcSet(self.arcs)

    @property
    def ends(self) -> int:
        return len(self.arcs)

    def __repr__(self) -> str:
        return f"Fragment({self.id!r}, mass={self.mass:.6g}, ends={self.ends})"


class ChordRecord(NamedTuple):
    chord: Chord
    time: float
    creator: str
    side0: int  # 0: child u0 is the side read ccw from chord.a to chord.b


class SplitRecord(NamedTuple):
    parent_ends: int
    ends0: int
    ends1: int


def sample_point(fragment: Fragment, rng) -> float:
    """Point of the fragment boundary drawn from normalized arc length."""
    if not fragment.mass > 0:
        raise ValueError("zero-mass fragment")
    while True:
        p = arcs_point(fragment.arcs, rng.random() * fragment.mass)
        if p is not None:
            return p


class Figela:
    """A finite lamination together with its live fragments."""

    def __init__(self):
        self.chords: list[ChordRecord] = []
        self.fragments: dict[str, Fragment] = {"": Fragment("", ())}
        self.splits: list[SplitRecord] = []
        self._feet: list[float] = []
        self._owner: dict[float, str] = {}
        self._tree: DualTree | None = None

    def __len__(self) -> int:
        return len(self.chords)

    @property
    def chord_list(self) -> list[Chord]:
        return [r.chord for r in self.chords]

    def insert_chord(self, frag: str, a: float, b: float, t: float = 0.0,
                     rng=None, side0: int | None = None) -> tuple[str, str]:
        """Split a live fragment by the chord [a, b]; returns the child ids.

        The child order is taken from side0 when given, from a fair coin of
        rng otherwise, and defaults to child 0 on the ccw side from min(a, b).
        """
        parent = self.fragments.get(frag)
        if parent is None:
            raise KeyError(f"no live fragment {frag!r}")
        chord = Chord.of(a, b)
        if chord.degenerate:
            raise ValueError("degenerate chord")
        lo, hi = chord
        if lo in self._owner or hi in self._owner:
            raise ValueError("chord foot coincides with an existing foot")
        if not (arcs_contains(parent.arcs, lo) and arcs_contains(parent.arcs, hi)):
            raise ValueError("foot not in fragment")
        if side0 is None:
            side0 = int(rng.random() < 0.5) if rng is not None else 0
        arcs_a, arcs_b = split_arcs(parent.arcs, lo, hi)
        if side0:
            arcs_a, arcs_b = arcs_b, arcs_a
        c0 = Fragment(frag + "0", arcs_a, t, chord)
        c1 = Fragment(frag + "1", arcs_b, t, chord)
        del self.fragments[frag]
        self.fragments[c0.id] = c0
        self.fragments[c1.id] = c1
        for child in (c0, c1):
            for s, _ in child.arcs:
                self._owner[s] = child.id
        bisect.insort(self._feet, lo)
        bisect.insort(self._feet, hi)
        self.chords.append(ChordRecord(chord, t, frag, side0))
        self.splits.append(SplitRecord(parent.ends, c0.ends, c1.ends))
        self._tree = None
        return c0.id, c1.id

    # point location -------------------------------------------------------

    def _gap_owner(self, x: float) -> str:
        feet = self._feet
        if not feet:
            return ""
        i = bisect.bisect_right(feet, x) - 1
        return self._owner[feet[i]]

    def locate(self, x: float) -> str:
        """Id of the fragment whose boundary contains the angle x."""
        x = wrap(x)
        if x in self._owner:
            raise ValueError(f"query point is a foot: {x!r}")
        return self._gap_owner(x)

    def fragment_at(self, x: float) -> Fragment:
        return self.fragments[self.locate(x)]

    # dual tree ------------------------------------------------------------

    def dual_tree(self) -> "DualTree":
        if self._tree is None:
            self._tree = DualTree.build(self)
        return self._tree

    def height(self, x: float, y: float) -> int:
        """Number of chords separating x from y, through the dual tree."""
        return self.dual_tree().distance(self.locate(x), self.locate(y))

    def height_bruteforce(self, x: float, y: float) -> int:
        q = Chord.of(x, y)
        lo, hi = q
        if lo in self._owner or hi in self._owner:
            raise ValueError("query point is a foot")
        return sum((a < lo < b) != (a < hi < b) for (a, b), *_ in self.chords)

    def separating_fragments(self, x: float, y: float) -> list[Fragment]:
        """Fragments met by the chord [x, y], by decreasing mass."""
        path = self.dual_tree().path(self.locate(x), self.locate(y))
        return sorted((self.fragments[u] for u in path), key=lambda f: -f.mass)

    def ends_histogram(self) -> Counter:
        return Counter(f.ends for f in self.fragments.values())

    def total_mass(self) -> float:
        return math.fsum(f.mass for f in self.fragments.values())

    # serialization --------------------------------------------------------

    def jsonl_text(self, seed: int | None = None, alpha: float | None = None,
                   extra: dict | None = None) -> str:
        """Header line, then one line per chord in insertion order."""
        header = {"kind": "figela", "seed": seed, "alpha": alpha}
        if extra:
            header.update(extra)
        lines = [json.dumps(header)]
        for (a, b), t, u, side0 in self.chords:
            lines.append(json.dumps({"u": u, "a": a, "b": b, "t": t, "side0": side0}))
        return "\n".join(lines) + "\n"

    def to_jsonl(self, path, seed: int | None = None, alpha: float | None = None,
                 extra: dict | None = None) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(self.jsonl_text(seed, alpha, extra))

    @classmethod
    def from_jsonl(cls, path) -> tuple["Figela", dict]:
        with open(path) as fh:
            lines = [ln for ln in fh if ln.strip()]
        if not lines:
            raise ValueError(f"{path}: empty file")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}:1: {exc.msg}") from None
        if not isinstance(header, dict) or header.get("kind") != "figela":
            raise ValueError(f"{path}:1: not a figela file")
        f = cls()
        for lineno, ln in enumerate(lines[1:], start=2):
            try:
                rec = json.loads(ln)
                f.insert_chord(rec["u"], rec["a"], rec["b"], rec["t"], side0=rec.get("side0", 0))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: {exc.msg}") from None
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
        return f, header

    @classmethod
    def replay(cls, records: Iterable) -> "Figela":
        """Rebuild from (time, a, b, creator, side0) tuples in time order."""
        f = cls()
        for t, a, b, u, side0 in records:
            f.insert_chord(u, a, b, t, side0=side0)
        return f


@dataclass
class DualTree:
    """Adjacency of live fragments across chords."""

    root: str
    adjacency: dict[str, list[str]] = field(default_factory=dict)

    @classmethod
    def build(cls, figela: Figela) -> "DualTree":
        sides: dict[Chord, list[str]] = {}
        adjacency: dict[str, list[str]] = {u: [] for u in figela.fragments}
        for u, frag in figela.fragments.items():
            for c in boundary_chords(frag.arcs):
                sides.setdefault(c, []).append(u)
        for c, us in sides.items():
            if len(us) != 2:
                raise RuntimeError(f"chord {c} borders {len(us)} fragments")
            adjacency[us[0]].append(us[1])
            adjacency[us[1]].append(us[0])
        return cls(figela._gap_owner(0.0), adjacency)

    @property
    def edges(self) -> list[tuple[str, str]]:
        return [(u, v) for u, vs in self.adjacency.items() for v in vs if u < v]

    def parents(self, source: str | None = None) -> dict[str, str | None]:
        source = self.root if source is None else source
        parent: dict[str, str | None] = {source: None}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in self.adjacency[u]:
                if v not in parent:
                    parent[v] = u
                    queue.append(v)
        return parent

    def path(self, u: str, v: str) -> list[str]:
        parent = self.parents(u)
        out = [v]
        while out[-1] != u:
            out.append(parent[out[-1]])
        return out[::-1]

    def distance(self, u: str, v: str) -> int:
        return len(self.path(u, v)) - 1

    def depths(self) -> dict[str, int]:
        depth = {self.root: 0}
        order = deque([self.root])
        while order:
            u = order.popleft()
            for v in self.adjacency[u]:
                if v not in depth:
                    depth[v] = depth[u] + 1
                    order.append(v)
        return depth


def height(f: Figela, x: float, y: float) -> int:
    return f.height(x, y)


def separating_fragments(f: Figela, x: float, y: float) -> list[Fragment]:
    return f.separating_fragments(x, y)


def dual_tree(f: Figela) -> DualTree:
    return f.dual_tree()


def ends_histogram(f: Figela) -> Counter:
    return f.ends_histogram()


def chords_from(items: Sequence) -> list[Chord]:
    return [c if isinstance(c, Chord) else Chord.of(*c) for c in items]
