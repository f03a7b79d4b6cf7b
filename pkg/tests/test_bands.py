import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from bcqd.bands import (
    BandSide,
    ConfigMismatch,
    CriticalValues,
    Method,
    band_taus,
    build_band,
    empirical_tau_quantile,
    simulate_critvals,
    simulate_critvals_known,
    simulate_critvals_pseudo,
    simulate_sup_draws,
)
from bcqd.estimator import Grid, QdEstimate, bc_kqd, default_bandwidth, standard_grid
from bcqd.kernels import KernelName, kernel_make, psi

TN = kernel_make("truncnormal")


def table(c, abs_c=None, n=100, h=0.1781, grid=None, taus=(0.8, 0.9, 0.95, 0.975)):
    abs_c = c if abs_c is None else abs_c
    return CriticalValues(
        method=Method.KnownProcess, n=n, h=h, kernel_name=KernelName.TruncatedNormal,
        grid=grid or Grid([0.5]), n_sims=1000, seed=0,
        one_sided={t: c for t in taus}, absolute={t: abs_c for t in taus},
    )


def estimate(qbc, psi_vals, n=100, h=0.1781, grid=None):
    grid = grid or Grid([0.5])
    qbc = np.asarray(qbc, dtype=float)
    psi_vals = np.asarray(psi_vals, dtype=float)
    return QdEstimate(grid, qbc * psi_vals, psi_vals, qbc, h, n, KernelName.TruncatedNormal)


def test_empirical_quantile_rule():
    draws = np.arange(1, 20001, dtype=float)[::-1]
    assert empirical_tau_quantile(draws, 0.95) == 19000.0
    assert empirical_tau_quantile(draws, 0.5) == 10000.0
    assert empirical_tau_quantile(draws, 0.99995) == 19999.0
    assert empirical_tau_quantile(draws, 0.99999) == 20000.0
    assert empirical_tau_quantile(np.array([3.0, 1.0, 2.0]), 0.5) == 2.0


@pytest.mark.parametrize("method", list(Method))
def test_critical_values_ordering(method):
    n = 300
    cv = simulate_critvals(TN, n, default_bandwidth(n).h, standard_grid(), 2000,
                           [0.5, 0.8, 0.9, 0.95, 0.99], seed=3, method=method)
    one = [cv.one_sided[t] for t in sorted(cv.one_sided)]
    ab = [cv.absolute[t] for t in sorted(cv.absolute)]
    assert all(np.diff(one) >= 0) and all(np.diff(ab) >= 0)
    assert cv.c(0.5) < cv.c(0.99)
    for t in cv.one_sided:
        assert cv.c_abs(t) >= cv.c(t)
        assert math.isfinite(cv.c(t)) and math.isfinite(cv.c_abs(t))


def test_rectangular_single_point_matches_binomial_oracle():
    n, h, tau = 200, 0.1, 0.9
    cv = simulate_critvals_known(kernel_make("rect"), n, h, Grid([0.5]), 10**5, [tau], seed=9)
    # at an interior point the process is sqrt(nh) * (B / (nh) - 1), B ~ Binomial(n, h)
    b = np.random.default_rng(99).binomial(n, h, size=10**5)
    oracle = math.sqrt(n * h) * (b / (n * h) - 1.0)
    assert cv.c(tau) == pytest.approx(empirical_tau_quantile(oracle, tau), rel=0.02)
    assert cv.c_abs(tau) == pytest.approx(empirical_tau_quantile(np.abs(oracle), tau), rel=0.02)


def test_methods_agree_on_median_at_single_point():
    n, sims = 5000, 4000
    h = default_bandwidth(n).h
    grid = Grid([0.5])
    known, _ = simulate_sup_draws(TN, n, h, grid, sims, 21, Method.KnownProcess)
    pseudo, _ = simulate_sup_draws(TN, n, h, grid, sims, 22, Method.PseudoUniform)
    se = [1.2533 * d.std(ddof=1) / math.sqrt(sims) for d in (known, pseudo)]
    assert abs(np.median(known) - np.median(pseudo)) <= 3 * math.hypot(*se)


def test_seeded_reproducibility_and_threads():
    n = 1000
    h = default_bandwidth(n).h
    args = (TN, n, h, standard_grid(), 1500, [0.9, 0.95], 5)
    ref = simulate_critvals_pseudo(*args, n_threads=1)
    for k in (2, 4, 8):
        other = simulate_critvals_pseudo(*args, n_threads=k)
        assert other.to_json() == ref.to_json()
    assert simulate_critvals_pseudo(TN, n, h, standard_grid(), 1500, [0.9, 0.95], 6).to_json() \
        != ref.to_json()


def test_simulator_preconditions():
    with pytest.raises(ValueError):
        simulate_critvals_known(TN, 100, 0.2, standard_grid(), 999, [0.9], 0)
    with pytest.raises(ValueError):
        simulate_critvals_known(TN, 100, 0.2, standard_grid(), 1000, [1.0], 0)
    with pytest.raises(ValueError):
        simulate_critvals_known(TN, 100, 0.01, standard_grid(), 1000, [0.9], 0)


def test_json_round_trip_and_schema():
    n = 200
    cv = simulate_critvals_known(TN, n, default_bandwidth(n).h, Grid.uniform(11), 1000,
                                 [0.8, 0.9], 1)
    data = json.loads(cv.to_json())
    for key in ("method", "n", "h", "kernel", "grid", "n_sims", "seed", "one_sided", "absolute"):
        assert key in data
    assert set(data["one_sided"]) == {"0.8", "0.9"}
    back = CriticalValues.from_json(cv.to_json())
    assert back.to_json() == cv.to_json()
    assert back.cache_key == cv.cache_key


def test_band_collapses_when_c_is_zero():
    est = estimate([2.0], [1.0])
    for side in BandSide:
        band = build_band(est, table(0.0), 0.9, side)
        if side is not BandSide.UpperOneSided:
            assert band.lower[0] == 2.0
        if side is not BandSide.LowerOneSided:
            assert band.upper[0] == 2.0


def test_band_plug_in_arithmetic():
    n, h, c = 100, 0.1781, 1.96
    scale = math.sqrt(n * h)
    est = estimate([2.0], [1.0], n=n, h=h)
    band = build_band(est, table(c, n=n, h=h), 0.95, BandSide.TwoSided)
    assert band.lower[0] == pytest.approx(2 / (1 + c / scale), rel=1e-14)
    assert band.upper[0] == pytest.approx(2 / (1 - c / scale), rel=1e-14)
    lower = build_band(est, table(c, n=n, h=h), 0.95, BandSide.LowerOneSided)
    assert lower.lower[0] == pytest.approx(2 / (1 + c / scale)) and lower.upper[0] == np.inf
    upper = build_band(est, table(c, n=n, h=h), 0.95, BandSide.UpperOneSided)
    assert upper.lower[0] == -np.inf and upper.upper[0] == pytest.approx(2 / (1 - c / scale))


def test_two_sided_uses_sup_abs_quantile():
    est = estimate([1.0], [1.0])
    cv = table(0.0, abs_c=1.0)
    band = build_band(est, cv, 0.9, BandSide.TwoSided)
    assert band.lower[0] < 1.0 < band.upper[0]
    assert band_taus([0.9], BandSide.TwoSided) == [pytest.approx(0.95)]


def test_degenerate_denominator_gives_infinite_upper():
    grid = Grid([0.0, 0.5])
    est = estimate([1.5, 1.2], [0.5, 1.0], grid=grid)
    scale = math.sqrt(100 * 0.1781)
    c = 0.75 * scale  # d = 1.5 at psi = 0.5, d = 0.75 at psi = 1
    band = build_band(est, table(c, grid=grid), 0.9, BandSide.TwoSided)
    assert band.upper[0] == np.inf and math.isfinite(band.lower[0]) and band.lower[0] > 0
    assert math.isfinite(band.upper[1])
    data = band.to_dict()
    assert data["upper"][0] is None and data["upper_unbounded"] == [True, False]


def test_mismatched_configuration_is_rejected():
    est = estimate([1.0], [1.0])
    with pytest.raises(ConfigMismatch, match="n"):
        build_band(est, table(1.0, n=101), 0.9)
    with pytest.raises(ConfigMismatch, match="grid"):
        build_band(est, table(1.0, grid=Grid([0.4])), 0.9)
    with pytest.raises(ConfigMismatch, match="h"):
        build_band(est, table(1.0, h=0.2), 0.9)
    with pytest.raises(ValueError):
        build_band(est, table(1.0), 1.0)
    with pytest.raises(KeyError):
        build_band(est, table(1.0, taus=(0.8,)), 0.9, BandSide.LowerOneSided)


@pytest.fixture(scope="module")
def real_band_setup():
    n = 1000
    h = default_bandwidth(n).h
    grid = standard_grid()
    levels = [0.5, 0.8, 0.9, 0.95, 0.99]
    taus = sorted(set(levels) | set(band_taus(levels, BandSide.TwoSided)))
    cv = simulate_critvals_known(TN, n, h, grid, 2000, taus, 2)
    data = np.sort(np.random.default_rng(0).random(n) ** 2)
    return bc_kqd(data, TN, h, grid), cv, levels


def test_bands_bracket_the_estimate(real_band_setup):
    est, cv, levels = real_band_setup
    for side in BandSide:
        for lv in levels:
            band = build_band(est, cv, lv, side)
            assert np.all(band.lower <= est.qhat_bc) and np.all(est.qhat_bc <= band.upper)
            if side is BandSide.TwoSided:
                assert np.all(band.lower > 0)


def test_band_nesting(real_band_setup):
    est, cv, levels = real_band_setup
    for lo, hi in zip(levels, levels[1:]):
        a = build_band(est, cv, lo, BandSide.TwoSided)
        b = build_band(est, cv, hi, BandSide.TwoSided)
        assert np.all(b.lower <= a.lower) and np.all(a.upper <= b.upper)


@settings(max_examples=100, deadline=None)
@given(c=st.floats(min_value=0.0, max_value=5.0), n=st.integers(50, 5000))
def test_boundary_inflation(c, n):
    h = default_bandwidth(n).h
    grid = standard_grid()
    psi_vals = np.asarray(psi(TN, h, grid.points))
    est = estimate(np.ones(len(grid)), psi_vals, n=n, h=h, grid=grid)
    band = build_band(est, table(c, n=n, h=h, grid=grid), 0.9, BandSide.TwoSided)
    interior = psi_vals == 1.0
    # multiplicative half-widths 1 + d and 1 / (1 - d)
    lower_factor = 1.0 / band.lower
    assert np.all(lower_factor >= lower_factor[interior].max() - 1e-12)
    if np.all(np.isinf(band.upper[interior])):
        assert np.all(np.isinf(band.upper))
    else:
        assert np.all(band.upper >= band.upper[interior].max() - 1e-12)
