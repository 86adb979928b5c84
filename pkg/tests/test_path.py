"""Unit and property tests for path sampling and evaluation."""

import math

import numpy as np
import pytest
import scipy.stats

import oracles
from changepoint_mc import (GAUSSIAN, LOGISTIC, OutOfHorizonError, SidePath,
                            TruncationError, TruncationPolicy, evaluate_log,
                            get_density, path_csv_text, rescale_time,
                            sample_log_at, sample_log_at_pair, sample_path,
                            sample_side_path, scan_side_path)
from changepoint_mc import path as path_mod
from conftest import build_path


def test_replay_bit_identical_both_densities():
    # the documented stream recipe, reimplemented in plain Python, must
    # reproduce every event time and cumulative sum bit for bit
    policy = TruncationPolicy()
    for name in ("gaussian", "logistic"):
        d = get_density(name)
        for gamma in (0.25, 1.0, 4.0):
            rng_lib = oracles.make_philox_stream(91, 5)
            rng_orc = oracles.make_philox_stream(91, 5)
            path = sample_path(d, gamma, policy, rng_lib)
            (tp, sp), (tm, sm) = oracles.replay_two_sided(
                rng_orc, name, gamma, policy.gap_T)
            np.testing.assert_array_equal(path.plus.event_times, tp)
            np.testing.assert_array_equal(path.plus.cum_sums, sp)
            np.testing.assert_array_equal(path.minus.event_times, tm)
            np.testing.assert_array_equal(path.minus.cum_sums, sm)


def test_buffer_growth_preserves_stream(monkeypatch):
    # force the kernel to return buffer-full repeatedly; the continuation
    # must still match the single-pass oracle exactly
    monkeypatch.setattr(path_mod, "_initial_capacity", lambda g, p: 4)
    rng_lib = oracles.make_philox_stream(17, 3)
    rng_orc = oracles.make_philox_stream(17, 3)
    side = sample_side_path(GAUSSIAN, 0.5, "plus", TruncationPolicy(), rng_lib)
    times, sums = oracles.replay_side(rng_orc, "gaussian", 0.5, 30.0)
    assert len(times) > 4
    np.testing.assert_array_equal(side.event_times, times)
    np.testing.assert_array_equal(side.cum_sums, sums)


def test_stopping_rule_invariants():
    policy = TruncationPolicy(gap_T=12.0)
    for rep in range(20):
        path = sample_path(GAUSSIAN, 1.0, policy,
                           oracles.make_philox_stream(5, rep))
        for side in (path.plus, path.minus):
            side.validate()
            s = side.cum_sums
            # termination fired exactly at the end and never earlier
            running_max = np.maximum.accumulate(s)
            below = s <= running_max - policy.gap_T
            assert below[-1]
            assert not below[:-1].any()
            assert side.trunc_gap >= policy.gap_T


def test_immediate_stop_two_entries():
    # a first jump at or below -gap_T ends the side at N = 1
    policy = TruncationPolicy(gap_T=0.05)
    hit = 0
    for seed in range(20):
        rng = oracles.make_philox_stream(seed, 0)
        gap = rng.standard_exponential()
        jump = oracles.jump_gaussian(rng.standard_normal(), 1.0)
        if jump <= -policy.gap_T:
            side = sample_side_path(GAUSSIAN, 1.0, "plus", policy,
                                    oracles.make_philox_stream(seed, 0))
            assert len(side.event_times) == 2
            assert side.event_times[1] == gap
            assert side.cum_sums[1] == jump
            hit += 1
    assert hit > 0


def test_event_count_is_poisson():
    # number of events in [0, 5] over 10^5 sides, chi-square against
    # Poisson(5), accept at p >= 1e-4
    n = 100_000
    t = 5.0
    counts = np.empty(n, dtype=np.int64)
    policy = TruncationPolicy()
    for rep in range(n):
        side = sample_side_path(GAUSSIAN, 1.0, "plus", policy,
                                oracles.make_philox_stream(40, rep))
        assert side.event_times[-1] > t
        counts[rep] = np.searchsorted(side.event_times, t, side="right") - 1
    kmax = 14
    observed = np.bincount(np.minimum(counts, kmax), minlength=kmax + 1)
    pmf = scipy.stats.poisson.pmf(np.arange(kmax), t)
    expected = np.append(pmf, 1.0 - pmf.sum()) * n
    stat, p = scipy.stats.chisquare(observed, expected)
    assert p >= 1e-4, (stat, p)


def test_truncation_rate_zero_at_small_gamma():
    # negative drift property: 10^6 gamma = 0.1 paths, event cap 10^6,
    # zero truncation failures (storage-free scan, same stopping kernel)
    policy = TruncationPolicy(gap_T=30.0, max_events=1_000_000)
    failures = 0
    for rep in range(1_000_000):
        rng = oracles.make_philox_stream(1009, rep)
        try:
            scan_side_path(GAUSSIAN, 0.1, "plus", policy, rng)
            scan_side_path(GAUSSIAN, 0.1, "minus", policy, rng)
        except TruncationError:
            failures += 1
    assert failures == 0


def test_truncation_error_when_capped():
    policy = TruncationPolicy(gap_T=30.0, max_events=10)
    with pytest.raises(TruncationError, match="max_events=10"):
        sample_side_path(GAUSSIAN, 0.1, "plus", policy,
                         oracles.make_philox_stream(3, 0))


def test_generic_lane_matches_kernel_lane():
    # a custom density wrapping the gaussian closed forms runs through the
    # python loop yet must produce the identical path (same stream recipe)
    from changepoint_mc import custom_density
    d = custom_density("gaussian-generic", GAUSSIAN.log_pdf,
                       GAUSSIAN.sampler, fisher_info=1.0)
    policy = TruncationPolicy()
    a = sample_path(GAUSSIAN, 1.5, policy, oracles.make_philox_stream(21, 4))
    b = sample_path(d, 1.5, policy, oracles.make_philox_stream(21, 4))
    # times share the exact same draws; sums may differ by an ulp because
    # the closed-form log ratio and the log_pdf difference round differently
    np.testing.assert_array_equal(a.plus.event_times, b.plus.event_times)
    np.testing.assert_array_equal(a.minus.event_times, b.minus.event_times)
    np.testing.assert_allclose(a.plus.cum_sums, b.plus.cum_sums,
                               rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(a.minus.cum_sums, b.minus.cum_sums,
                               rtol=1e-13, atol=1e-13)


def test_evaluate_log_handcrafted():
    path = build_path([0.0, 1.0, 3.0], [0.0, 0.5, -31.0],
                      [0.0, 2.0], [0.0, -31.0])
    assert evaluate_log(path, 0.0) == 0.0
    assert evaluate_log(path, 0.5) == 0.0          # x in (0, x_1) -> 0
    assert evaluate_log(path, 1.0) == 0.5          # right-continuity at x_1
    assert evaluate_log(path, 2.9) == 0.5
    assert evaluate_log(path, 3.0) == -31.0
    assert evaluate_log(path, -0.5) == 0.0         # (-x_1, 0] -> 0
    assert evaluate_log(path, -1.999) == 0.0
    assert evaluate_log(path, -2.0) == -31.0       # mirrored continuity
    got = evaluate_log(path, np.array([-2.0, 0.25, 1.5]))
    np.testing.assert_array_equal(got, [-31.0, 0.0, 0.5])
    with pytest.raises(OutOfHorizonError):
        evaluate_log(path, 3.1)
    with pytest.raises(OutOfHorizonError):
        evaluate_log(path, -2.1)


def test_evaluate_log_bruteforce_oracle():
    rng = oracles.make_philox_stream(77, 0)
    for rep in range(5):
        path = sample_path(GAUSSIAN, 0.8, TruncationPolicy(),
                           oracles.make_philox_stream(78, rep))
        lo = -float(path.minus.event_times[-1])
        hi = float(path.plus.event_times[-1])
        xs = rng.uniform(lo, hi, 200)
        for x in xs:
            want = oracles.evaluate_log_bruteforce(path, float(x))
            got = evaluate_log(path, float(x))
            assert got == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_rescale_time():
    path = build_path([0.0, 3.0, 4.0], [0.0, 1.0, -31.0],
                      [0.0, 1.0, 2.0], [0.0, -0.5, -31.5], gamma=0.5)
    # identity when I*gamma^2 = 1
    same = rescale_time(path, 1.0 / 0.25)
    np.testing.assert_array_equal(same.plus.event_times, path.plus.event_times)
    # gaussian I = 1, gamma = 0.5: event time 3.0 -> 0.75
    scaled = rescale_time(path, 1.0)
    assert scaled.plus.event_times[1] == 0.75
    np.testing.assert_array_equal(scaled.plus.cum_sums, path.plus.cum_sums)
    # evaluating the rescaled path at y matches the original at y / (I g^2)
    for y in (0.2, -0.3, 0.9):
        assert evaluate_log(scaled, y) == evaluate_log(path, y / 0.25)
    with pytest.raises(ValueError):
        rescale_time(path, 0.0)


def test_scan_matches_full_sampling():
    # the storage-free scan consumes the same stream and must agree with
    # the stored path on every reported statistic
    marks = np.array([0.5, 3.0, 7.0])
    for name in ("gaussian", "logistic"):
        d = get_density(name)
        full = sample_side_path(d, 1.0, "plus", TruncationPolicy(),
                                oracles.make_philox_stream(55, 1))
        scan = scan_side_path(d, 1.0, "plus", TruncationPolicy(),
                              oracles.make_philox_stream(55, 1), marks=marks)
        assert scan.n_events == len(full.event_times) - 1
        assert scan.last_time == full.event_times[-1]
        assert scan.last_sum == full.cum_sums[-1]
        assert scan.max_sum == full.max
        for j, mark in enumerate(marks):
            idx = np.searchsorted(full.event_times, mark, side="right") - 1
            assert scan.s_at_marks[j] == full.cum_sums[idx]
            after = full.cum_sums[full.event_times > mark]
            want_sup = after.max() if after.size else -np.inf
            assert scan.sup_after_marks[j] == want_sup


def test_scan_marks_validation():
    rng = oracles.make_philox_stream(1, 1)
    with pytest.raises(ValueError, match="strictly increasing"):
        scan_side_path(GAUSSIAN, 1.0, "plus", TruncationPolicy(), rng,
                       marks=[1.0, 1.0])
    with pytest.raises(ValueError, match=">= 0"):
        scan_side_path(GAUSSIAN, 1.0, "plus", TruncationPolicy(), rng,
                       marks=[-1.0, 2.0])


def test_marginal_lane_matches_full_paths_in_law():
    # ln Z(x) from the single-point lane vs evaluate_log on full paths:
    # same law (two-sample KS at level 1e-4)
    gamma, x, n = 1.0, 3.0, 20_000
    direct = sample_log_at(GAUSSIAN, gamma, x, n, oracles.make_philox_stream(60, 0))
    full = np.empty(n)
    for rep in range(n):
        path = sample_path(GAUSSIAN, gamma, TruncationPolicy(),
                           oracles.make_philox_stream(61, rep))
        full[rep] = evaluate_log(path, x)
    assert scipy.stats.ks_2samp(direct, full).pvalue >= 1e-4


def test_marginal_lane_negative_x_uses_minus_shift():
    # at x < 0 the jumps use shift -gamma; their mean is still -KL
    n = 50_000
    vals = sample_log_at(GAUSSIAN, 1.0, -4.0, n, oracles.make_philox_stream(62, 0))
    # E ln Z(-4) = -4 * KL = -4 * 0.5 = -2.0
    se = vals.std() / math.sqrt(n)
    assert abs(vals.mean() + 2.0) < 4.0 * se


def test_marginal_lane_blocking_invariance(monkeypatch):
    # shrinking the vectorization block must not change the draws; block
    # boundaries only reassociate the additions, so values agree to ~ulp
    big = sample_log_at(GAUSSIAN, 0.5, 40.0, 200, oracles.make_philox_stream(63, 0))
    monkeypatch.setattr(path_mod, "_EVENT_BLOCK", 64)
    small = sample_log_at(GAUSSIAN, 0.5, 40.0, 200, oracles.make_philox_stream(63, 0))
    np.testing.assert_allclose(big, small, rtol=1e-10, atol=1e-12)


def test_pair_lane_consistency():
    rng = oracles.make_philox_stream(64, 0)
    s1, s2 = sample_log_at_pair(GAUSSIAN, 1.0, 2.0, 5.0, 30_000, rng)
    # marginal laws match the single-point lane
    m1 = sample_log_at(GAUSSIAN, 1.0, 2.0, 30_000, oracles.make_philox_stream(64, 1))
    m2 = sample_log_at(GAUSSIAN, 1.0, 5.0, 30_000, oracles.make_philox_stream(64, 2))
    assert scipy.stats.ks_2samp(s1, m1).pvalue >= 1e-4
    assert scipy.stats.ks_2samp(s2, m2).pvalue >= 1e-4
    # the increment is independent of the first segment: cov(s1, s2-s1) ~ 0
    inc = s2 - s1
    r = np.corrcoef(s1, inc)[0, 1]
    assert abs(r) < 4.0 / math.sqrt(30_000)


def test_pair_lane_edges():
    rng = oracles.make_philox_stream(65, 0)
    a, b = sample_log_at_pair(GAUSSIAN, 1.0, 3.0, 3.0, 1000, rng)
    np.testing.assert_array_equal(a, b)
    a, b = sample_log_at_pair(GAUSSIAN, 1.0, 0.0, 3.0, 1000, rng)
    assert np.all(a == 0.0)
    a, b = sample_log_at_pair(GAUSSIAN, 1.0, 0.0, 0.0, 1000, rng)
    assert np.all(a == 0.0) and np.all(b == 0.0)
    with pytest.raises(ValueError):
        sample_log_at_pair(GAUSSIAN, 1.0, 4.0, 3.0, 10, rng)


def test_csv_dump_round_trip(toy_path):
    text = path_csv_text(toy_path)
    lines = text.strip().split("\n")
    assert lines[0] == "side,index,event_time,cum_sum"
    assert lines[1] == "plus,0,0.0,0.0"
    assert lines[2] == "plus,1,2.0,-40.0"
    assert lines[3] == "minus,0,0.0,0.0"
    assert lines[4] == "minus,1,1.0,-40.0"
    # repr floats parse back exactly
    for line in lines[1:]:
        _, _, t, s = line.split(",")
        assert repr(float(t)) == t and repr(float(s)) == s


def test_side_path_validation_errors():
    with pytest.raises(ValueError, match="start at"):
        SidePath(np.array([1.0, 2.0]), np.array([0.0, -1.0]), 1, 1.0).validate()
    with pytest.raises(ValueError, match="strictly increasing"):
        SidePath(np.array([0.0, 2.0, 2.0]), np.array([0.0, -1.0, -2.0]),
                 2, 2.0).validate()


def test_policy_validation():
    assert TruncationPolicy() == TruncationPolicy(gap_T=30.0, max_events=10_000_000)
    with pytest.raises(ValueError):
        TruncationPolicy(gap_T=0.0)
    with pytest.raises(ValueError):
        TruncationPolicy(max_events=0)
    with pytest.raises(ValueError, match="gamma"):
        sample_side_path(GAUSSIAN, -1.0, "plus", TruncationPolicy(),
                         oracles.make_philox_stream(1, 0))
    with pytest.raises(ValueError, match="side"):
        sample_side_path(GAUSSIAN, 1.0, "up", TruncationPolicy(),
                         oracles.make_philox_stream(1, 0))
