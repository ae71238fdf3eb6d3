import math
from fractions import Fraction

import numpy as np
import pytest

from lamina.analysis.dimension import box_dimension, covering_sum, default_scales
from lamina.analysis.ends import (
    child_ends_test,
    ends_chain,
    martingale_means,
    one_step_mean,
)
from lamina.analysis.estimators import (
    chord_counts,
    estimate_h1,
    estimate_m1,
    h1_closed_form,
    height_martingale_uniform,
    m1_closed_form,
    martingale_uniform,
)
from lamina.analysis.operator import (
    fixed_point_report,
    kernel_normalization_error,
    verify_operator_fixed_point,
)
from lamina.analysis.selfsim import branch, self_similarity_test
from lamina.analysis.stats import StatSeries, estimate_exponent, within_sigmas
from lamina.engine import BETA_STAR
from lamina.geometry import Chord
from lamina.lamination import Figela


def test_exponent_of_exact_power_law():
    t = np.geomspace(1, 1000, 12)
    s = StatSeries(t, 3.0 * t ** 0.7, np.zeros_like(t), 1)
    slope, err = estimate_exponent(s)
    assert abs(slope - 0.7) < 1e-12 and err < 1e-12
    noisy = StatSeries(t, 3.0 * t ** 0.7, 0.01 * t ** 0.7, 100)
    assert abs(estimate_exponent(noisy)[0] - 0.7) < 1e-12


def test_exponent_errors():
    t = np.arange(1.0, 5.0)
    with pytest.raises(ValueError):
        estimate_exponent(StatSeries(t, t, np.zeros(4), 1))
    t = np.arange(1.0, 7.0)
    with pytest.raises(ValueError):
        estimate_exponent(StatSeries(t, t - 2.0, np.zeros(6), 1))


def test_stat_series_validation(tmp_path):
    with pytest.raises(ValueError):
        StatSeries([1.0, 2.0], [1.0, 1.0], [-0.1, 0.1], 2)
    with pytest.raises(ValueError):
        StatSeries([2.0, 1.0], [1.0, 1.0], [0.1, 0.1], 2)
    s = StatSeries.from_samples([1.0, 2.0], np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert s.value.tolist() == [2.0, 3.0] and s.replicas == 2
    s.to_csv(tmp_path / "s.csv")
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "t,mean,stderr"
    assert within_sigmas(1.0, 0.1, 1.25) and not within_sigmas(1.0, 0.1, 1.35)


def test_closed_forms():
    assert float(m1_closed_form(0.5)) == pytest.approx(1.30318183393121, abs=1e-12)
    assert float(m1_closed_form(0.25)) == pytest.approx(1.10877983353836, abs=1e-12)
    assert float(m1_closed_form(0.25)) == float(m1_closed_form(0.75))
    assert float(h1_closed_form(0.5)) == pytest.approx(4 / math.pi, abs=1e-15)


def test_m1_symmetric_in_r():
    rows = estimate_m1([0.25, 0.75], T=50.0, alpha=2.0, replicas=400, seed=0)
    (_, a, sa), (_, b, sb) = rows
    assert abs(a - b) <= 2 * math.hypot(sa, sb)
    with pytest.raises(ValueError):
        estimate_m1([0.0], T=1.0, alpha=2.0, replicas=2, seed=0)


def test_martingale_uniform_small():
    s = martingale_uniform(2.0, [1.0, 5.0, 20.0], replicas=2000, seed=0)
    assert all(within_sigmas(m, e, 1.0) for m, e in zip(s.value, s.stderr))


def test_height_martingale_small():
    s = height_martingale_uniform([3.0, 6.0], replicas=2000, seed=0)
    assert all(within_sigmas(m, e, 1.0) for m, e in zip(s.value, s.stderr))


def test_h1_smaller_near_the_foot():
    lo, slo = estimate_h1(0.1, 6.0, 600, seed=0)
    hi, shi = estimate_h1(0.5, 6.0, 600, seed=0)
    assert hi - lo > 2 * math.hypot(slo, shi)
    with pytest.raises(ValueError):
        estimate_h1(0.5, 13.0, 1, seed=0)


def test_chord_counts_shape():
    c = chord_counts(1.0, [2.0, 1.0], replicas=5, seed=0)
    assert c.shape == (5, 2) and np.all(c[:, 0] <= c[:, 1])


def test_operator_fixed_point():
    assert verify_operator_fixed_point(64) < 1e-6
    assert kernel_normalization_error() < 1e-9


def test_operator_negative_control():
    # a wrong exponent is not a fixed point
    assert verify_operator_fixed_point(64, exponent=0.5) > 1e-3
    assert kernel_normalization_error(beta=0.5) > 1e-3
    with pytest.raises(ValueError):
        fixed_point_report(grid_size=10)


def test_ends_chain_one_step_mean_exact():
    for k in range(1, 51):
        assert one_step_mean(k) == Fraction(k, 2) + 1


def test_ends_chain_steps():
    c = ends_chain(200, 5, seed=1)
    assert len(c.trajectory) == 201 and c.trajectory[0] == 5 and c.state == c.trajectory[-1]
    assert all(1 <= b <= a + 1 for a, b in zip(c.trajectory, c.trajectory[1:]))
    with pytest.raises(ValueError):
        ends_chain(3, 0, seed=1)


def test_ends_martingale_starts_from_two():
    m, s = martingale_means(12, 4, 200_000, seed=2)
    assert m[0] == 2.0
    assert all(within_sigmas(a, b, 2.0) for a, b in zip(m[1:], s[1:]))


def test_child_ends_uniform(random_figela):
    splits = []
    for seed in range(40):
        splits.extend(random_figela(200, 500 + seed).splits)
    res = child_ends_test(splits)
    assert res.pvalue > 0.01 and res.dof > 0
    with pytest.raises(ValueError):
        child_ends_test([(3, 7, 1)])
    with pytest.raises(ValueError):
        child_ends_test([])


def test_box_dimension_of_a_chord():
    d, counts = box_dimension([Chord(0.0, 0.5)], default_scales())
    assert abs(d - 1.0) < 0.05
    assert np.all(np.diff(counts) > 0)
    with pytest.raises(ValueError):
        box_dimension([Chord(0.0, 0.5)], [0.1])
    with pytest.raises(ValueError):
        box_dimension([], [0.1, 0.01])


def test_covering_sum_one_chord():
    f = Figela()
    f.insert_chord("", 0.2, 0.7)
    # two separating halves, one end each
    expected = 2.0 ** 2.8 * 2 * math.pi ** 0.8
    assert covering_sum(f, 0.5, 1.8) == pytest.approx(expected, rel=1e-14)
    assert covering_sum(f, 0.5, 1.8) == pytest.approx(34.8044, abs=1e-4)
    with pytest.raises(ValueError):
        covering_sum(f, 0.5, 1.0)


def test_branch():
    assert [branch(t, 0.3, 0.6) for t in (0.1, 0.3, 0.45, 0.6, 0.9)] == [0, 0, 1, 2, 2]


def test_self_similarity_small_run():
    res = self_similarity_test(T=20.0, replicas=400, seed=1)
    assert res.direct.shape == res.composed.shape == (400, 3)
    assert res.passed()
