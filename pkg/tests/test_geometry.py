import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lamina.geometry import (
    ArcSet,
    Chord,
    arcs_mass,
    boundary_chords,
    chord_set_hausdorff,
    cross,
    is_noncrossing,
    locate_arc,
    split_arcs,
    wrap,
)

angle = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)


def test_cross_examples():
    assert cross(Chord(0.1, 0.4), Chord(0.2, 0.6))
    assert not cross(Chord(0.1, 0.4), Chord(0.5, 0.9))
    # a shared foot is not a crossing
    assert not cross(Chord(0.1, 0.4), Chord(0.4, 0.7))
    # nested chords do not cross
    assert not cross(Chord(0.1, 0.9), Chord(0.2, 0.8))


def test_cross_symmetric_on_many_pairs():
    gen = np.random.default_rng(0)
    pts = np.sort(gen.random((100_000, 2, 2)), axis=2)
    for (a, b), (c, d) in pts:
        assert cross(Chord(a, b), Chord(c, d)) == cross(Chord(c, d), Chord(a, b))


def _brute_cross(c1, c2):
    # segment intersection in the plane, away from shared endpoints
    p = [np.array([math.cos(2 * math.pi * x), math.sin(2 * math.pi * x)]) for x in (*c1, *c2)]

    def orient(a, b, c):
        return np.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    return (orient(p[0], p[1], p[2]) != orient(p[0], p[1], p[3])
            and orient(p[2], p[3], p[0]) != orient(p[2], p[3], p[1]))


@settings(max_examples=300, deadline=None)
@given(angle, angle, angle, angle)
def test_cross_matches_planar_intersection(a, b, c, d):
    feet = [a, b, c, d]
    gaps = [abs(x - y) for i, x in enumerate(feet) for y in feet[i + 1:]]
    if min(min(g, 1 - g) for g in gaps) < 1e-6:
        return
    c1, c2 = Chord.of(a, b), Chord.of(c, d)
    assert cross(c1, c2) == _brute_cross(c1, c2)


@settings(max_examples=300, deadline=None)
@given(angle, angle, angle, angle, angle)
def test_cross_rotation_invariant(a, b, c, d, shift):
    feet = [a, b, c, d]
    shifted = [wrap(x + shift) for x in feet]
    for pts in (feet, shifted):
        gaps = [abs(x - y) for i, x in enumerate(pts) for y in pts[i + 1:]]
        if min(min(g, 1 - g) for g in gaps) < 1e-9:
            return
    before = cross(Chord.of(a, b), Chord.of(c, d))
    after = cross(Chord.of(*shifted[:2]), Chord.of(*shifted[2:]))
    assert before == after


def test_noncrossing_set():
    assert is_noncrossing([Chord(0.1, 0.9), Chord(0.2, 0.8), Chord(0.3, 0.4)])
    assert not is_noncrossing([Chord(0.1, 0.4), Chord(0.2, 0.6)])
    assert is_noncrossing([])


def test_arcs_and_split():
    assert arcs_mass(()) == 1.0
    a, b = split_arcs((), 0.2, 0.7)
    assert a == ((0.2, 0.7),) and b == ((0.7, 0.2),)
    assert math.isclose(arcs_mass(a), 0.5) and math.isclose(arcs_mass(b), 0.5)
    # the fragment across angle 0
    c0, c1 = split_arcs(b, 0.1, 0.8)
    assert math.isclose(arcs_mass(c0) + arcs_mass(c1), 0.5, abs_tol=1e-15)
    assert sorted([len(c0), len(c1)]) == [1, 2]
    assert locate_arc(b, 0.9) == 0
    assert locate_arc(b, 0.5) == -1
    # arc endpoints are not interior points
    assert locate_arc(b, 0.7) == -1


def test_arcset_and_boundary_chords():
    s = ArcSet(((0.7, 0.2),))
    assert s.ends == 1 and math.isclose(s.mass, 0.5)
    assert s.contains(0.95) and not s.contains(0.3)
    assert boundary_chords(((0.2, 0.4), (0.6, 0.8))) == [Chord(0.4, 0.6), Chord(0.2, 0.8)]


def _segment_distance(p, a, b):
    ab = b - a
    t = np.clip(((p - a) @ ab) / (ab @ ab), 0.0, 1.0)
    return np.linalg.norm(a + t[:, None] * ab - p, axis=1)


def _oracle_hausdorff(A, B, spacing=2e-4):
    # dense points on each set against exact point-to-segment distances
    def points(chords):
        out = []
        for c in chords:
            p, q = c.endpoints_xy()
            n = int(np.ceil(np.linalg.norm(q - p) / spacing)) + 1
            out.append(p + np.linspace(0, 1, n)[:, None] * (q - p))
        return np.vstack(out)

    def directed(X, Y):
        pts = points(X)
        d = np.full(len(pts), np.inf)
        for c in Y:
            a, b = c.endpoints_xy()
            d = np.minimum(d, _segment_distance(pts, a, b))
        return d.max()

    return max(directed(A, B), directed(B, A))


def test_hausdorff_trivial():
    A = [Chord(0.0, 0.5)]
    assert chord_set_hausdorff(A, A) == 0.0
    assert chord_set_hausdorff(A, [Chord(0.0, 0.5), Chord(0.0, 0.5)]) == 0.0


def test_hausdorff_perpendicular_diameters():
    A, B = [Chord(0.0, 0.5)], [Chord(0.25, 0.75)]
    oracle = _oracle_hausdorff(A, B, spacing=1e-4)
    assert math.isclose(oracle, 1.0, abs_tol=1e-9)
    assert abs(chord_set_hausdorff(A, B) - oracle) < 1e-2


def test_hausdorff_random_sets_against_oracle():
    gen = np.random.default_rng(3)
    for _ in range(5):
        A = [Chord.of(*gen.random(2)) for _ in range(4)]
        B = [Chord.of(*gen.random(2)) for _ in range(3)]
        assert abs(chord_set_hausdorff(A, B) - _oracle_hausdorff(A, B)) < 2e-3


def test_hausdorff_empty_sets():
    with pytest.raises(ValueError, match="empty chord set"):
        chord_set_hausdorff([], [Chord(0.0, 0.5)])
    assert chord_set_hausdorff([], [], with_circle=True) == 0.0
    d = chord_set_hausdorff([], [Chord(0.0, 0.5)], with_circle=True)
    assert abs(d - 1.0) < 2e-3


def test_hausdorff_pseudometric():
    gen = np.random.default_rng(5)
    for _ in range(20):
        sets = [[Chord.of(*gen.random(2)) for _ in range(gen.integers(1, 4))] for _ in range(3)]
        dab = chord_set_hausdorff(sets[0], sets[1])
        assert dab == chord_set_hausdorff(sets[1], sets[0])
        dbc = chord_set_hausdorff(sets[1], sets[2])
        dac = chord_set_hausdorff(sets[0], sets[2])
        # discretization slack of two grid spacings
        assert dac <= dab + dbc + 4e-3
