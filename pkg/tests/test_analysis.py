from __future__ import annotations

import math

import numpy as np
import pytest

from darkmeter.bayes import McmcConfig, analyze, default_f_grid, powerlaw_fit, sensitivity_sweep
from darkmeter.bayes.analysis import read_sweep_csv, summarize_posterior, write_sweep_csv
from darkmeter.bayes.sampler import PosteriorSamples
from darkmeter.errors import ConvergenceError, InsufficientDataError

from conftest import PUB_MEAN, PUB_N, PUB_VAR


def test_published_statistics_posterior(published_analysis):
    s = published_analysis.summary
    shrink = 10 / 11
    # fixed-variance conjugate values: mean shrunk by f/(f+1), sd by sqrt(f/(f+1))
    mcse = published_analysis.samples.diagnostics["mu"]["mcse_mean"]
    assert s.mean == pytest.approx(PUB_MEAN * shrink, abs=4 * mcse)
    assert s.sd == pytest.approx(math.sqrt(PUB_VAR / PUB_N * shrink), rel=0.01)
    assert s.hdi_full[0] <= s.mean <= s.hdi_full[1]
    assert s.pd_plus == pytest.approx(0.42, abs=0.02)
    assert s.pos_upper == pytest.approx(0.039, abs=0.004)
    assert s.hdi_pos[0] == 0.0
    assert s.sd_ratio_full > 0 and s.sd_ratio_pos > 0


def test_default_grid():
    g = default_f_grid(PUB_N)
    assert g[:9] == [1, 3, 10, 30, 100, 300, 1e3, 1e4, 1e5]
    assert g[-1] == pytest.approx(705529.44)


def test_unconverged_refuses_evidence(published_analysis):
    s = published_analysis.samples
    bad = PosteriorSamples(s.mu, s.sigma_sq, {"mu": {"converged": False}}, s.acceptance)
    with pytest.raises(ConvergenceError):
        summarize_posterior(bad, published_analysis.prior)
    assert not summarize_posterior(bad, published_analysis.prior, allow_unconverged=True).converged


def test_powerlaw_exact():
    f = np.array([1, 10, 100, 1e3, 1e4])
    a, b = powerlaw_fit(f, 2 * np.sqrt(f))
    assert a == pytest.approx(2.0, rel=1e-12) and b == pytest.approx(0.5, abs=1e-12)
    a, b = powerlaw_fit(f, np.full(5, 3.0))
    assert b == pytest.approx(0.0, abs=1e-12) and a == pytest.approx(3.0)
    with pytest.raises(InsufficientDataError):
        powerlaw_fit(f, f, fit_threshold=1e3)


def test_sweep_posterior_stable_and_sqrt_growth(tmp_path, published_summary):
    grid = [10, 100, 1e3, 1e4, 1e5]
    rows = sensitivity_sweep(published_summary, grid, McmcConfig(seed=1))
    se = math.sqrt(PUB_VAR / PUB_N)
    for s in rows:
        shrink = s.f / (s.f + 1)
        assert s.sd == pytest.approx(se * math.sqrt(shrink), rel=0.02)
        assert s.mean == pytest.approx(PUB_MEAN * shrink, abs=0.02 * se)
    _, b = powerlaw_fit([s.f for s in rows], [s.sd_ratio_pos for s in rows])
    assert b == pytest.approx(0.5, abs=0.05)

    path = tmp_path / "sweep.csv"
    write_sweep_csv(rows, path)
    assert path.read_text().splitlines()[0] == "f,mean,sd,hdi_lo,hdi_hi,pos_upper,pd_plus,rsd_full,rsd_pos"
    table = read_sweep_csv(path)
    np.testing.assert_array_equal(table["f"], grid)
    np.testing.assert_array_equal(table["rsd_pos"], [s.sd_ratio_pos for s in rows])


def test_sweep_grid_must_be_sorted(published_summary):
    with pytest.raises(ValueError):
        sensitivity_sweep(published_summary, [10, 1])


@pytest.mark.filterwarnings("ignore::darkmeter.errors.ExtrapolationWarning")
def test_pure_dark_hdi_contains_zero_and_light_detected():
    rng = np.random.default_rng(7)
    dark = rng.poisson(200, 200_000) - rng.poisson(200, 200_000)
    s = analyze(dark.astype(float), 10).summary
    assert s.hdi_full[0] < 0 < s.hdi_full[1]
    light = dark + rng.poisson(0.5 * 10, 200_000) / 10
    assert analyze(light, 10).summary.pd_plus > 0.99
