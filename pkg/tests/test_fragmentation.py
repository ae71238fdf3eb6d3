import math

import numpy as np
import pytest
from scipy import integrate, stats

from lamina.analysis.stats import StatSeries, estimate_exponent
from lamina.engine import BETA_STAR, EngineConfig, simulate
from lamina.fragmentation import (
    NU_C,
    NU_D,
    SNAPSHOT_COLUMNS,
    DislocationMeasure,
    FragState,
    KappaFn,
    kappa,
    malthusian,
    malthusian_martingale,
    power_sum,
    run_fragmentation,
    sample_dislocation,
    snapshot_row,
    validate_pairs,
)

N = 1_000_000


def _within(sample, target, k=3.0):
    sample = np.asarray(sample, dtype=float)
    return abs(sample.mean() - target) <= k * sample.std(ddof=1) / math.sqrt(len(sample))


def test_nu_c_samples():
    s = NU_C.sample(np.random.default_rng(0), N)
    validate_pairs(s)
    assert np.all(s[:, 0] + s[:, 1] == 1.0)
    assert _within(s[:, 0], 0.75) and _within(s[:, 1], 0.25)


def test_nu_d_samples():
    s = NU_D.sample(np.random.default_rng(1), N)
    validate_pairs(s)
    zero = s[:, 1] == 0
    assert _within(zero, 2 / 3)
    assert _within(s.sum(axis=1), 5 / 6)
    # given s2 = 0 the kept mass has density 3 m**2
    assert stats.kstest(s[zero, 0], lambda m: m ** 3).pvalue > 0.01
    # hypothesis (H)
    assert np.all(s[:, 0] > 0) and np.mean(s[:, 1] > 0) > 0.3


def test_sample_dislocation_single_draw():
    s1, s2 = sample_dislocation(NU_D, np.random.default_rng(2))
    assert 1 > s1 >= s2 >= 0


def test_custom_measure_validation():
    bad = DislocationMeasure.custom(lambda g: (0.3, 0.6))
    with pytest.raises(ValueError):
        bad.sample(np.random.default_rng(0), 3)


def test_kappa_closed_forms():
    assert kappa(NU_D, 0.0) == pytest.approx(-1 / 3, abs=1e-15)
    assert kappa(NU_D, BETA_STAR) == pytest.approx(0.0, abs=1e-15)
    assert kappa(NU_C, 1.0) == 0.0
    assert kappa(NU_D, 1.0) == pytest.approx(1 / 6, abs=1e-15)
    with pytest.raises(ValueError):
        kappa(NU_D, -0.1)


@pytest.mark.parametrize("p", [0.0, 0.3, 1.0, 2.5, 7.0])
def test_kappa_c_closed_form_against_quadrature(p):
    # u uniform on [1/2, 1] has density 2
    val, _ = integrate.quad(lambda u: 2.0 * (1.0 - u ** p - (1.0 - u) ** p), 0.5, 1.0, epsabs=1e-13)
    assert kappa(NU_C, p) == pytest.approx(val, abs=1e-10)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
def test_kappa_d_monte_carlo(p):
    est, se = KappaFn(NU_D, samples=N, seed=3).evaluate(p)
    assert abs(est - NU_D.closed_kappa(p)) <= 0.01
    assert se < 1e-3


def test_kappa_monotone():
    grid = np.linspace(0, 6, 40)
    closed = [kappa(NU_D, p) for p in grid]
    assert all(a < b for a, b in zip(closed, closed[1:]))
    mc = KappaFn(NU_D, samples=100_000, seed=4)
    vals = [mc(p) for p in grid]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert kappa(NU_D, 200.0) == pytest.approx(1.0, abs=0.03)


def test_malthusian_exponents():
    assert malthusian(NU_C) == pytest.approx(1.0, abs=1e-9)
    assert malthusian(NU_D) == pytest.approx(0.5615528128088303, abs=1e-9)
    half = DislocationMeasure.custom(lambda g: (0.5, 0.5), conservative=True)
    assert malthusian(KappaFn(half, samples=1000)) == pytest.approx(1.0, abs=1e-9)
    assert malthusian(lambda p: 1.0 - 2.0 ** (1.0 - p)) == pytest.approx(1.0, abs=1e-9)


def test_malthusian_rejects_non_h():
    lone = DislocationMeasure.custom(lambda g: (0.5, 0.0))
    with pytest.raises(ValueError, match="hypothesis"):
        malthusian(KappaFn(lone, samples=100))


def test_power_sum_conventions():
    s = FragState(0.0, np.array([0.5, 0.25, 0.0]))
    assert power_sum(s, 0.0) == 2.0
    assert power_sum(s, 1.0) == 0.75
    assert malthusian_martingale(s, 2.0) == power_sum(s, 2.0)
    init = run_fragmentation(1.0, NU_D, 1.0, 0, [0.0])[0]
    assert malthusian_martingale(init, BETA_STAR) == 1.0


def test_nu_c_conserves_mass():
    for seed in range(20):
        for st in run_fragmentation(1.5, NU_C, 50.0, seed, [1.0, 10.0, 50.0]):
            assert abs(math.fsum(st.masses) - 1.0) < 1e-12
            assert malthusian_martingale(st, 1.0) == pytest.approx(1.0, abs=1e-12)
            assert np.all(np.diff(st.masses) <= 0)


def test_nu_d_mass_nonincreasing():
    states = run_fragmentation(1.0, NU_D, 30.0, 1, [1.0, 5.0, 10.0, 30.0])
    sums = [math.fsum(s.masses) for s in states]
    assert all(b <= a + 1e-15 for a, b in zip(sums, sums[1:]))


def test_nu_c_particle_count_alpha_two():
    T = 400.0
    c = [run_fragmentation(2.0, NU_C, T, s, [T])[0].n_particles / math.sqrt(T) for s in range(300)]
    # particles = chords + 1 for the chord process
    assert abs(np.mean(c) / math.sqrt(math.pi) - 1) <= 0.05


def test_nu_d_alpha_zero_count_martingale():
    times = [3.0, 6.0, 9.0]
    rows = np.array([[math.exp(-t / 3) * st.n_particles for t, st in zip(times, run_fragmentation(
        0.0, NU_D, 9.0, seed, times))] for seed in range(4000)])
    for k in range(3):
        assert _within(rows[:, k], 1.0)


def test_nu_d_malthusian_martingale_alpha_one():
    times = [1.0, 5.0, 20.0]
    rows = np.array([[malthusian_martingale(st, BETA_STAR) for st in run_fragmentation(1.0, NU_D, 20.0, seed, times)]
                     for seed in range(10_000)])
    for k in range(3):
        assert _within(rows[:, k], 1.0)


def test_nu_d_particle_count_exponent():
    times = np.geomspace(50.0, 800.0, 8)
    counts = np.array([[st.n_particles for st in run_fragmentation(2.0, NU_D, 800.0, seed, times)]
                       for seed in range(1000)])
    slope, _ = estimate_exponent(StatSeries.from_samples(times, counts))
    assert abs(slope - BETA_STAR / 2) <= 0.03


def test_separating_masses_follow_nu_d_fragmentation():
    # largest fragment separating 1 from a uniform point, against the (1, NU_D) process
    from lamina.analysis.estimators import uniform_point
    t = 3.0
    chord_side, frag_side = [], []
    for seed in range(3000):
        v = uniform_point(seed)
        rec = simulate(EngineConfig(alpha=1.0, t_max=t, seed=seed, prune=True), [(0.0, v)])
        chord_side.append(rec.final_separating[0][0])
        frag_side.append(run_fragmentation(1.0, NU_D, t, 10 ** 6 + seed, [t])[0].masses[0])
    assert stats.ks_2samp(chord_side, frag_side).pvalue > 0.01


def test_snapshot_row_layout():
    st = run_fragmentation(2.0, NU_D, 100.0, 3, [100.0])[0]
    row = snapshot_row(st, BETA_STAR)
    assert len(row) == len(SNAPSHOT_COLUMNS) == 12
    assert row[0] == 100.0 and row[1] == st.n_particles
    assert row[3] == pytest.approx(malthusian_martingale(st, BETA_STAR))


def test_record_times_validated():
    with pytest.raises(ValueError):
        run_fragmentation(1.0, NU_D, 5.0, 0, [6.0])
    with pytest.raises(ValueError):
        run_fragmentation(-1.0, NU_D, 5.0, 0, [1.0])
