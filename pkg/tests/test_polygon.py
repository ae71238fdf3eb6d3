import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from lamina.engine import EngineConfig, simulate
from lamina.geometry import is_noncrossing
from lamina.polygon import (
    UniquenessViolation,
    check_triangulation,
    is_diagonal,
    n_diagonals,
    sample_permutation_matching,
    sample_uniform_recursive,
)


def test_is_diagonal():
    assert is_diagonal(1, 3, 4) and is_diagonal(2, 4, 4)
    assert not is_diagonal(1, 2, 4) and not is_diagonal(4, 1, 4) and not is_diagonal(2, 2, 4)
    assert [n_diagonals(m) for m in (3, 4, 5, 6)] == [0, 2, 5, 9]


def test_square_diagonal_is_fair():
    runs = 100_000
    hits = sum(sample_uniform_recursive(4, s).diagonals[0] in ((1, 3), (3, 1)) for s in range(runs))
    assert abs(hits / runs - 0.5) <= 3 * math.sqrt(0.25 / runs)


def test_pentagon_first_diagonal_uniform():
    counts = {}
    for s in range(20_000):
        i, j = sample_uniform_recursive(5, s).diagonals[0]
        key = (min(i, j), max(i, j))
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 5
    assert stats.chisquare(list(counts.values())).pvalue > 0.01


@pytest.mark.parametrize("n", [4, 5, 6, 7, 10, 31, 200, 1000])
def test_recursive_gives_triangulations(n):
    for seed in range(5):
        st = sample_uniform_recursive(n, seed)
        assert len(st.diagonals) == n - 3
        assert all(is_diagonal(i, j, n) for i, j in st.diagonals)
        assert is_noncrossing(st.chords)
        assert all(len(face) == 3 for face in st.faces)
        assert sum(len(face) - 2 for face in st.faces) == n - 2
        assert check_triangulation(st.diagonals, n)


def test_small_n_rejected():
    with pytest.raises(ValueError):
        sample_uniform_recursive(3, 0)
    with pytest.raises(ValueError):
        sample_permutation_matching(3, 0)
    with pytest.raises(ValueError):
        sample_permutation_matching(4, 0, sigma=[1, 2, 2, 4])


def test_exact_feet():
    st = sample_uniform_recursive(12, 3)
    for (i, j), (a, b), c in zip(st.diagonals, st.exact_feet(), st.chords):
        assert a == Fraction(i % 12, 12) and b == Fraction(j % 12, 12)
        assert sorted((float(a), float(b))) == [c.a, c.b]


def test_matching_hand_trace_square():
    st = sample_permutation_matching(4, None, sigma=[1, 2, 3, 4])
    assert st.diagonals == [(1, 3)]
    assert st.free == {2, 4}
    assert st.n_free == [1, 2, 1, 2]
    assert st.n_matched == [0, 0, 1, 1]


def test_matching_uniqueness_counterexample():
    # vertex 4 sees both free vertices 1 and 2 across the empty hexagon
    sigma = [1, 2, 4, 3, 5, 6]
    with pytest.raises(UniquenessViolation):
        sample_permutation_matching(6, None, sigma=sigma)
    st = sample_permutation_matching(6, None, strict=False, sigma=sigma)
    assert st.violations == [3]
    assert st.diagonals[0] == (1, 4)


@pytest.mark.parametrize("n", [4, 5, 8, 50, 1000])
def test_matching_bookkeeping(n):
    for seed in range(10):
        st = sample_permutation_matching(n, seed, strict=False)
        assert is_noncrossing(st.chords)
        assert all(is_diagonal(i, j, n) for i, j in st.diagonals)
        for k, (f, m) in enumerate(zip(st.n_free, st.n_matched), start=1):
            assert f + 2 * m == k
        assert len(st.diagonals) <= n // 2
        used = [v for d in st.diagonals for v in d]
        assert len(set(used)) == len(used) and not set(used) & st.free


def test_first_chord_gap_matches_continuous_law():
    n, runs = 1000, 2000
    discrete = []
    for s in range(runs):
        i, j = sample_uniform_recursive(n, s).diagonals[0]
        discrete.append(abs(i - j) / n)
    cont = []
    for s in range(runs):
        _, a, b, _, _ = simulate(EngineConfig(alpha=2.0, chord_budget=1, seed=s)).events[0]
        cont.append(abs(b - a))
    assert stats.ks_2samp(discrete, cont).pvalue > 0.01
    # the gap of two sorted uniforms has density 2(1 - x)
    assert stats.kstest(discrete, lambda x: 1 - (1 - np.asarray(x)) ** 2).pvalue > 0.01
