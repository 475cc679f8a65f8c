"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the PASS/FAIL lines are also
collected into the pytest terminal summary.  Running this file directly with
python prints them without pytest.
"""

from __future__ import annotations

import math
import time
import warnings

import numpy as np

from darkmeter.attenuation import AttenuationSystem, StackMeasurement, attenuation, ea_estimate, load_system, solve_ls
from darkmeter.bayes import McmcConfig, analyze, hdi, pd_plus, powerlaw_fit, sensitivity_sweep
from darkmeter.budget import FlashModelInput, dark_hdi_length, flash_corrected, retina_scaling
from darkmeter.common import GaussianEstimate, Side
from darkmeter.jzs import TTestInput, jzs_bf01, jzs_bf01_riemann, t_statistic
from darkmeter.protocol import SeriesSummary, build_differences, summarize
from darkmeter.simulator import DarkRateModel, RandomWalk, SimConfig, simulate_campaign, simulate_campaign_detail

PUB_MEAN, PUB_VAR, PUB_N = -4.14e-3, 445.21, 997920
RESULTS: list[str] = []


def report(label: str, checks: dict[str, bool], detail: str) -> None:
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}" + (f" | failed: {', '.join(failed)}" if failed else "")
    RESULTS.append(line)
    print(line)
    assert ok, line


def within(x: float, target: float, rel: float) -> bool:
    return abs(x - target) <= rel * abs(target)


def dark_campaign(n_target: int, seed: int, **kw) -> SeriesSummary:
    """Summary of a simulated campaign with about ``n_target`` difference samples."""
    pairs = math.ceil(n_target / 9)
    cfg = SimConfig(duration_hours=pairs * 20 / 3600, seed=seed, **kw)
    return summarize(build_differences(simulate_campaign(cfg)))


def test_ac01_posterior_reproduction():
    t0 = time.perf_counter()
    s = analyze(SeriesSummary.from_stats(PUB_MEAN, PUB_VAR, PUB_N), 10, McmcConfig(seed=0)).summary
    elapsed = time.perf_counter() - t0
    checks = {
        "mean": -5.0e-3 <= s.mean <= -3.5e-3,
        "sd": within(s.sd, 21.0e-3, 0.10),
        "hdi_lo": within(s.hdi_full[0], -4.50e-2, 0.15),
        "hdi_hi": within(s.hdi_full[1], 3.71e-2, 0.15),
        "pd_plus": abs(s.pd_plus - 0.42) <= 0.02,
        "pos_upper": abs(s.pos_upper - 0.039) <= 0.004,
        "runtime": elapsed < 300,
    }
    report(
        "AC1 posterior reproduction",
        checks,
        f"mean={s.mean:.3e} sd={s.sd:.4f} hdi=[{s.hdi_full[0]:.4f}, {s.hdi_full[1]:.4f}] "
        f"pd+={s.pd_plus:.3f} upper={s.pos_upper:.4f} t={elapsed:.1f}s",
    )


def test_ac02_conjugate_oracle():
    failures = 0
    for i in range(25):
        rng = np.random.default_rng(1000 + i)
        light = rng.uniform(0.0, 0.5)
        x = (rng.poisson(200 + light, 100_000) - rng.poisson(200, 100_000)).astype(float)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = analyze(x, 10, McmcConfig(seed=i))
        st, p = res.stats, res.prior
        prec = 1 / p.sigma0_sq + st.n / st.variance
        mean = (p.mu0 / p.sigma0_sq + st.n * st.mean / st.variance) / prec
        sd = prec**-0.5
        d = res.samples.diagnostics["mu"]
        mu = res.samples.mu_draws
        if abs(mu.mean() - mean) > 3 * d["mcse_mean"] or abs(mu.std(ddof=1) - sd) > 3 * d["mcse_sd"]:
            failures += 1
    report("AC2 conjugate oracle", {"failures<=2": failures <= 2}, f"{failures}/25 datasets outside 3 MCSE")


def test_ac03_savage_dickey_scaling():
    rows = sensitivity_sweep(SeriesSummary.from_stats(PUB_MEAN, PUB_VAR, PUB_N), None, McmcConfig(seed=0))
    f = [s.f for s in rows]
    _, b_pos = powerlaw_fit(f, [s.sd_ratio_pos for s in rows], 10)
    _, b_full = powerlaw_fit(f, [s.sd_ratio_full for s in rows], 10)
    r_top = rows[-1].sd_ratio_pos
    checks = {"b_pos": abs(b_pos - 0.5) <= 0.05, "b_full": abs(b_full - 0.5) <= 0.05, "r_sd": 850 <= r_top <= 1150}
    report(
        "AC3 Savage-Dickey scaling",
        checks,
        f"b_pos={b_pos:.4f} b_full={b_full:.4f} r_pos(f={rows[-1].f:.0f})={r_top:.1f}",
    )


def test_ac04_jzs_cross_check():
    t = t_statistic(PUB_MEAN, math.sqrt(PUB_VAR), PUB_N)
    bf = jzs_bf01(TTestInput(t, PUB_N, 0.707, Side.POSITIVE_ONLY))
    worst = 0.0
    for t_i in (-3.0, -0.8, 0.0, 1.1, 4.0):
        for n_i in (5, 60, 3000, 997920):
            inp = TTestInput(t_i, n_i)
            worst = max(worst, abs(jzs_bf01(inp) / jzs_bf01_riemann(inp) - 1))
    checks = {"bf01": within(bf, 1029.59, 0.01), "riemann": worst <= 1e-4}
    report("AC4 JZS cross-check", checks, f"t={t:.5f} BF01={bf:.2f} max rel diff vs Riemann (20 pts)={worst:.1e}")


def test_ac05_ea_tomography():
    sol = solve_ls(load_system())
    published = (3.18, 4.21, 2.87, 3.19, 3.06)
    ods_ok = all(abs(a - b) <= 0.01 for a, b in zip(sol.od, published))

    truth_src, truth_od = 4.7, (1.1, 2.25, 0.6, 3.05)
    stacks = [(True, tuple(j == i for j in range(4))) for i in range(4)]
    stacks += [(True, tuple(j in (i, (i + 1) % 4) for j in range(4))) for i in range(4)]
    stacks += [(False, tuple(j == i for j in range(4))) for i in range(4)]
    rows = [StackMeasurement(l, f, truth_src * l - sum(o for o, on in zip(truth_od, f) if on)) for l, f in stacks]
    rt = solve_ls(AttenuationSystem(tuple(rows), 1e12))
    rt_err = max(abs(rt.log10_source - truth_src), *(abs(a - b) for a, b in zip(rt.od, truth_od)))

    a_c = attenuation(GaussianEstimate(sol.log10_source, sol.log10_source_sd), GaussianEstimate(0.47, 0.09))
    ea = ea_estimate(GaussianEstimate(1.82, 0.03), a_c)
    checks = {
        "log10_source": abs(sol.log10_source - 9.10) <= 0.01,
        "ods": ods_ok,
        "round_trip": rt_err <= 1e-10,
        "delta_ea": within(ea.mean, 6.9e-10, 0.10),
    }
    report(
        "AC5 EA tomography",
        checks,
        f"log10 source={sol.log10_source:.3f} ODs={tuple(round(o, 3) for o in sol.od)} "
        f"round-trip err={rt_err:.1e} A_c={a_c.mean:.3e} delta_EA={ea.mean:.3e}",
    )


def test_ac06_hdi_length_predictor():
    # one realisation's upper bound scatters by +-50% around the prediction, so the
    # criterion is evaluated on the median over replicate campaigns per n
    replicates = 201
    ratios = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for n in (10**4, 10**5, 10**6):
            r = []
            for seed in range(replicates):
                sm = dark_campaign(n, seed)
                predicted = dark_hdi_length(sm.variance / 2, sm.n)
                r.append(analyze(sm, 10, McmcConfig(seed=seed)).summary.pos_upper / predicted)
            ratios[n] = float(np.median(r))
    checks = {f"n={n:g}": abs(v - 1) <= 0.15 for n, v in ratios.items()}
    detail = " ".join(f"n={n:g}: median measured/predicted={v:.3f}" for n, v in ratios.items())
    report("AC6 dark-limited interval length predictor", checks, f"{detail} ({replicates} campaigns each)")


def test_ac07_metallic_signature():
    replicates = 101
    pd, hi = [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for seed in range(replicates):
            s = analyze(dark_campaign(PUB_N, seed, flash_closed_rate=0.045), 10, McmcConfig(seed=seed)).summary
            pd.append(s.pd_plus)
            hi.append(s.hdi_full[1])
    med_pd, med_hi = float(np.median(pd)), float(np.median(hi))
    checks = {"pd+<0.05": med_pd < 0.05, "pd+~0.026": abs(med_pd - 0.026) <= 0.03, "hdi excludes 0": med_hi < 0}
    report(
        "AC7 metallic-shutter signature",
        checks,
        f"median pd+={med_pd:.4f} median HDI upper={med_hi:.4f} "
        f"({replicates} campaigns; {np.mean(np.array(hi) < 0):.0%} individually exclude 0)",
    )


def test_ac08_flash_correction():
    black, metallic = GaussianEstimate(-4.19e-3, 21.0e-3), GaussianEstimate(-4.48e-2, 2.31e-2)
    shifted = flash_corrected(FlashModelInput(black, metallic, 1.05, 3.4e-4))
    same = flash_corrected(FlashModelInput(black, metallic, 1.05, 0.0))
    shift = shifted.mean - black.mean
    checks = {"shift<1e-4": abs(shift) < 1e-4, "rho=0 exact": same == black}
    report("AC8 flash correction", checks, f"shift={shift:.2e} cnt/s")


def test_ac09_retina_scaling():
    v = retina_scaling(0.039, 0.34)
    report("AC9 retina scaling", {"0.074": abs(v - 0.074) <= 0.001}, f"{v:.5f} cnt/s")


def test_ac10_property_suites():
    rng = np.random.default_rng(10)
    lo, hi = hdi(rng.standard_normal(1_000_000), 0.95)
    sym = rng.standard_normal(500_000)
    pdp = pd_plus(np.concatenate([sym, -sym]))
    pdp_raw = pd_plus(rng.standard_normal(1_000_000))

    z, exact_zero, deterministic = [], True, True
    for seed in range(100):
        cfg = SimConfig(dark=DarkRateModel(drift=RandomWalk(20.0), hold_intervals=20), duration_hours=2, seed=seed)
        series, _, total = simulate_campaign_detail(cfg)
        pairs = total[: len(total) // 20 * 20].reshape(-1, 2, 10)[:, :, 1:]
        exact_zero &= bool(np.all(pairs[:, 0] - pairs[:, 1] == 0))
        deterministic &= simulate_campaign(cfg).equals(series)
        x = build_differences(series).samples
        z.append(x.mean() / (x.std(ddof=1) / math.sqrt(x.size)))
    z = np.array(z)
    pooled = z.sum() / math.sqrt(z.size)
    checks = {
        "hdi": abs(lo + 1.96) <= 0.02 and abs(hi - 1.96) <= 0.02,
        "pd+": abs(pdp - 0.5) <= 0.005 and abs(pdp_raw - 0.5) <= 0.005,
        "expected delta exactly 0": exact_zero,
        "pooled |z|<3": abs(pooled) < 3,
        "z spread ~1": 0.75 <= z.std(ddof=1) <= 1.25,
        "determinism": deterministic,
    }
    report(
        "AC10 property suites",
        checks,
        f"hdi=[{lo:.3f}, {hi:.3f}] pd+={pdp_raw:.4f} drift runs: pooled z={pooled:+.2f} "
        f"sd(z)={z.std(ddof=1):.2f} |z|>3 in {int(np.sum(np.abs(z) > 3))}/100",
    )


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_ac"):
            try:
                fn()
            except AssertionError:
                pass
