from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from darkmeter.common import Side
from darkmeter.jzs import TTestInput, jzs_bf01, jzs_bf01_riemann, log_chi_mgf, t_statistic

from conftest import PUB_MEAN, PUB_N, PUB_VAR


def chi_mgf_mpmath(a: float, n: int) -> float:
    """log E[exp(a V)], V ~ chi_n, via the parabolic-cylinder closed form."""
    mpmath.mp.dps = 40
    log_int = mpmath.loggamma(n) + mpmath.mpf(a) ** 2 / 4 + mpmath.log(mpmath.pcfd(-n, -a))
    log_norm = (n / 2 - 1) * mpmath.log(2) + mpmath.loggamma(mpmath.mpf(n) / 2)
    return float(log_int - log_norm)


@pytest.mark.parametrize("a,n", [(0.0, 5), (0.7, 3), (-1.2, 7), (2.5, 40), (-3.0, 200), (5.0, 1000), (-0.4, 2)])
def test_chi_mgf_against_mpmath(a, n):
    assert log_chi_mgf(a, n)[0] == pytest.approx(chi_mgf_mpmath(a, n), abs=1e-9)


def test_published_t_and_bayes_factor():
    t = t_statistic(PUB_MEAN, math.sqrt(PUB_VAR), PUB_N)
    assert t == pytest.approx(-0.196, abs=1e-3)
    assert jzs_bf01(TTestInput(t, PUB_N)) == pytest.approx(1029.59, rel=0.01)


@pytest.mark.parametrize("side", [Side.POSITIVE_ONLY, Side.TWO_SIDED])
def test_scale_to_zero_gives_one(side):
    # the half-Cauchy has no mean, so the one-sided gap closes like r log(1/r)
    gaps = [abs(1.0 - jzs_bf01(TTestInput(1.3, 500, scale=r, side=side))) for r in (1e-5, 1e-7, 1e-9, 1e-11)]
    assert all(np.diff(gaps) < 0)
    assert gaps[-1] < 1e-8


GRID = [(t, n) for t in (-3.0, -0.8, 0.0, 1.1, 4.0) for n in (5, 60, 3000, 997920)]


@pytest.mark.parametrize("t,n", GRID)
def test_quadrature_matches_riemann(t, n):
    for side in (Side.POSITIVE_ONLY, Side.TWO_SIDED):
        inp = TTestInput(t, n, side=side)
        assert jzs_bf01(inp) == pytest.approx(jzs_bf01_riemann(inp), rel=1e-4)


def test_two_sided_monotone_in_abs_t():
    values = [jzs_bf01(TTestInput(t, 200, side=Side.TWO_SIDED)) for t in (0.0, 0.5, 1.0, 2.0, 3.0)]
    assert all(np.diff(values) < 0)
    assert jzs_bf01(TTestInput(-1.0, 200, side=Side.TWO_SIDED)) == pytest.approx(values[2], rel=1e-9)


@pytest.mark.parametrize("t", [0.3, 1.0, 2.5])
def test_two_sided_between_one_sided(t):
    two = jzs_bf01(TTestInput(t, 150, side=Side.TWO_SIDED))
    plus, minus = jzs_bf01(TTestInput(t, 150)), jzs_bf01(TTestInput(-t, 150))
    assert min(plus, minus) < two < max(plus, minus)


def test_agrees_with_savage_dickey_at_matching_prior(published_summary):
    from darkmeter.bayes import McmcConfig, analyze

    t = t_statistic(PUB_MEAN, math.sqrt(PUB_VAR), PUB_N)
    bf = jzs_bf01(TTestInput(t, PUB_N))
    r = analyze(published_summary, 0.707 * PUB_N, McmcConfig(seed=0)).summary.sd_ratio_pos
    assert r == pytest.approx(bf, rel=0.10)


def test_input_validation():
    with pytest.raises(ValueError):
        TTestInput(0.1, 1)
    with pytest.raises(ValueError):
        TTestInput(0.1, 10, scale=0.0)
