"""Acceptance gate: every contract criterion at its stated tolerance.

Each test covers one numbered criterion and prints a single pass/fail
line with the measured values.  Runs at the stated replication counts,
so this module dominates the suite's runtime (several minutes).
"""

import math
import shutil
import subprocess
import time

import numpy as np
import scipy.stats

import oracles
from changepoint_mc import (GAUSSIAN, SweepConfig, TruncationPolicy, Z0Config,
                            check_lemma1_cf, check_lemma5_tail, constants,
                            estimate, estimate_second_moment,
                            expected_sqrt_target, get_density, make_stream,
                            run_replication, run_sweep, sample_log_at,
                            sample_path, sample_z0_many, sample_zinf_many,
                            xi_bounds, zeta, zeta3)


def _report(num: int, ok: bool, detail: str):
    print(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_criterion_01_zinf_exact_moments():
    t0 = time.perf_counter()
    n = 1_000_000
    ref = constants()
    zs, tau = sample_zinf_many(0.0, n, make_stream(12345, 0))
    eta = tau - 2.0 * zs
    b_hat, b_se = estimate_second_moment(zs)
    ok = abs(b_hat - 0.5) < 4.0 * b_se
    parts = [f"B={b_hat:.4f} (4se {4 * b_se:.4f})"]
    for alpha, target in ((0.0, 2.0), (0.25, 0.875), (0.5, 0.5)):
        xi = (1.0 - alpha) * tau - alpha * eta
        m_hat, m_se = estimate_second_moment(xi)
        ok = ok and abs(m_hat - target) < 4.0 * m_se
        assert target == ref.M_inf(alpha)
        parts.append(f"M^{alpha:g}={m_hat:.4f} vs {target}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 10.0
    _report(1, ok, ", ".join(parts) + f", {elapsed:.1f}s (< 10s)")


def test_criterion_02_expected_sqrt_identity():
    t0 = time.perf_counter()
    n = 1_000_000
    ok = True
    parts = []
    k = 0
    for gamma in (0.5, 1.0, 2.0):
        for y in (1.0, 4.0):
            x = y / (GAUSSIAN.fisher_info * gamma * gamma)
            logs = sample_log_at(GAUSSIAN, gamma, x, n, make_stream(20_000, k))
            k += 1
            vals = np.exp(0.5 * logs)
            target = math.exp((y / gamma ** 2)
                              * (math.exp(-gamma ** 2 / 8.0) - 1.0))
            assert target == expected_sqrt_target(GAUSSIAN, gamma, y)
            se = vals.std(ddof=1) / math.sqrt(n)
            ok = ok and abs(vals.mean() - target) < 4.0 * se
            parts.append(f"g={gamma:g},y={y:g}: {vals.mean():.5f}~{target:.5f}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 120.0
    _report(2, ok, "; ".join(parts) + f", {elapsed:.1f}s (< 2min)")


def test_criterion_03_finite_gamma_cf():
    rep = check_lemma1_cf(0.5, 1.0, N=1_000_000, rng=make_stream(30_000, 0),
                          target="exact")
    _report(3, rep.passed,
            f"CF of ln X_0.5(1) pointwise within 4se over t in [-3, 3]; "
            f"worst margin {rep.statistic:.2e} <= 0 at N=10^6")


def test_criterion_04_small_gamma_limits():
    t0 = time.perf_counter()
    gamma = 0.25
    cfg = SweepConfig(gamma_grid=(gamma,), alphas=(0.0, 0.25, 0.5),
                      reps=1_000_000, seed=12345)
    rows = run_sweep(cfg)
    ref = constants()
    g4 = gamma ** 4
    b_scaled = g4 * rows[0].B_hat
    ok = abs(b_scaled - ref.B0) < 0.10 * ref.B0
    ok = ok and all(r.trunc_failures == 0 for r in rows)
    parts = [f"g^4*B={b_scaled:.3f} vs {ref.B0:.4f}"]
    for r in rows:
        m_scaled = g4 * r.M_hat
        ok = ok and abs(m_scaled - ref.M0) < 0.10 * ref.M0
        ok = ok and abs(r.E_hat - ref.E0) < 0.05 * ref.E0
        parts.append(f"a={r.alpha:g}: g^4*M={m_scaled:.2f}, E={r.E_hat:.4f}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 900.0
    _report(4, ok, "; ".join(parts) + f", {elapsed:.0f}s (< 15min)")


def test_criterion_05_large_gamma_limits():
    t0 = time.perf_counter()
    cfg = SweepConfig(gamma_grid=(8.0,), alphas=(0.0, 0.5),
                      reps=1_000_000, seed=12345)
    rows = run_sweep(cfg)
    b_hat = rows[0].B_hat
    m0_hat = rows[0].M_hat
    m5_hat = rows[1].M_hat
    ok = (abs(b_hat - 0.5) < 0.05 and abs(m0_hat - 2.0) < 0.2
          and abs(m5_hat - 0.5) < 0.05)
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 300.0
    _report(5, ok, f"B={b_hat:.4f} vs 0.5, M^0={m0_hat:.4f} vs 2.0, "
                   f"M^0.5={m5_hat:.4f} vs 0.5, {elapsed:.0f}s (< 5min)")


def test_criterion_06_oracle_equivalence():
    policy = TruncationPolicy()
    checked = 0
    worst_rel = 0.0
    combos = [(g, name) for name in ("gaussian", "logistic")
              for g in (0.25, 1.0, 4.0)]
    per = 1000 // len(combos) + 1
    for i, (gamma, name) in enumerate(combos):
        d = get_density(name)
        for rep in range(per):
            if checked >= 1000:
                break
            path = sample_path(d, gamma, policy, make_stream(60_000 + i, rep))
            z, _ = zeta(path)
            want = oracles.zeta_quadrature(path)
            rel = abs(z - want) / max(abs(want), 1e-300)
            worst_rel = max(worst_rel, rel)
            assert rel <= 1e-8, (gamma, name, rep, rel)
            assert xi_bounds(path) == oracles.xi_argmax_grid(path), \
                (gamma, name, rep)
            checked += 1
    _report(6, checked == 1000 and worst_rel <= 1e-8,
            f"zeta matches quadrature (worst rel {worst_rel:.1e} <= 1e-8) "
            f"and xi bounds match grid argmax exactly on {checked} paths")


def test_criterion_07_tail_bound():
    rep = check_lemma5_tail(0.5, A_grid=(2.0, 5.0, 10.0), b=1.0 / 16.0,
                            N=100_000, rng=make_stream(70_000, 0))
    _report(7, rep.passed,
            f"exceedance <= 4exp(-A/16) + 4se at A in (2, 5, 10) and "
            f"E sup sqrt(X) <= 2 + 4se; margin {rep.statistic:.2e}, N=10^5")


def test_criterion_08_brownian_reference():
    t0 = time.perf_counter()
    res = sample_z0_many(Z0Config(grid_step=1e-3), 100_000,
                         make_stream(80_000, 0))
    ref = constants()
    b_hat, _ = estimate_second_moment(res.zeta)
    m_hat, _ = estimate_second_moment(res.xi)
    sups = np.concatenate([res.sup_plus, res.sup_minus])
    pval = scipy.stats.kstest(sups, "expon").pvalue
    ok = (abs(b_hat - ref.B0) < 0.10 * ref.B0
          and abs(m_hat - ref.M0) < 0.10 * ref.M0
          and pval >= 1e-4)
    elapsed = time.perf_counter() - t0
    _report(8, ok, f"B0={b_hat:.3f} vs {ref.B0:.4f}, M0={m_hat:.3f} vs 26, "
                   f"sup KS p={pval:.3f} >= 1e-4, {elapsed:.0f}s")


def test_criterion_09_reproducibility(tmp_path):
    cpmc = shutil.which("cpmc")
    assert cpmc is not None, "cpmc console script not installed"
    texts = []
    for i, workers in enumerate((1, 4, 1)):
        out = tmp_path / f"sweep_{i}.csv"
        cmd = [cpmc, "sweep", "--gamma-grid", "0.5,2", "--alphas", "0,0.5",
               "--reps", "500", "--seed", "99", "--workers", str(workers),
               "--out", str(out)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        texts.append(out.read_bytes())
    ok = texts[0] == texts[1] == texts[2]
    _report(9, ok, "sweep CSV byte-identical across worker counts {1, 4} "
                   "and across re-runs at fixed seed")


def test_criterion_10_symmetry_law():
    n = 100_000
    alpha = 0.25
    a = np.empty(n // 2)
    b = np.empty(n // 2)
    for rep in range(n // 2):
        t = run_replication(GAUSSIAN, 1.0, TruncationPolicy(),
                            make_stream(100_000, rep))
        a[rep] = t.xi_alpha(1.0 - alpha)
        t = run_replication(GAUSSIAN, 1.0, TruncationPolicy(),
                            make_stream(100_001, rep))
        b[rep] = -t.xi_alpha(alpha)
    pval = scipy.stats.ks_2samp(a, b).pvalue
    _report(10, pval >= 1e-4,
            f"xi^(0.75) vs -xi^(0.25) two-sample KS p={pval:.3f} >= 1e-4 "
            f"over 10^5 replications")
