"""Tests for the closed-form verification checks."""

import math

import numpy as np
import pytest

import oracles
from changepoint_mc import (GAUSSIAN, LOGISTIC, check_expected_sqrt,
                            check_lemma1_cf, check_lemma2_holder,
                            check_lemma3_decay, check_lemma5_tail,
                            expected_sqrt_target, format_report_line,
                            gaussian_expected_sqrt, reports_to_json,
                            run_verify_suite, sqrt_ratio_mean)


def test_gaussian_expected_sqrt_examples():
    assert gaussian_expected_sqrt(1.0, 0.0) == 1.0
    want = math.exp(2.0 * (math.exp(-1.0 / 8.0) - 1.0))
    assert gaussian_expected_sqrt(1.0, 2.0) == pytest.approx(want, rel=1e-15)
    assert want == pytest.approx(0.790566, abs=1e-6)
    # symmetric in y and decreasing in |y|
    assert gaussian_expected_sqrt(1.0, -2.0) == gaussian_expected_sqrt(1.0, 2.0)
    assert gaussian_expected_sqrt(1.0, 3.0) < gaussian_expected_sqrt(1.0, 2.0)
    # gamma -> 0 limit is exp(-|y|/8)
    assert gaussian_expected_sqrt(1e-4, 2.0) == pytest.approx(
        math.exp(-0.25), rel=1e-7)


def test_sqrt_ratio_mean_closed_form_and_quadrature():
    # gaussian closed form
    for gamma in (0.25, 1.0, 3.0):
        assert sqrt_ratio_mean(GAUSSIAN, gamma) == pytest.approx(
            math.exp(-gamma * gamma / 8.0), rel=1e-12)
    # logistic: quadrature against a direct Monte Carlo average
    gamma = 1.0
    eps = oracles.make_philox_stream(500, 0).logistic(
        0.0, math.sqrt(3.0) / math.pi, 400_000)
    mc = np.exp(0.5 * (np.array([oracles.jump_logistic(e, gamma) for e in eps])))
    got = sqrt_ratio_mean(LOGISTIC, gamma)
    se = mc.std(ddof=1) / math.sqrt(mc.size)
    assert abs(got - mc.mean()) < 4.0 * se
    assert 0.0 < got < 1.0


def test_expected_sqrt_target_matches_gaussian_closed_form():
    for gamma in (0.5, 1.0, 2.0):
        for y in (0.5, 1.0, 4.0):
            assert expected_sqrt_target(GAUSSIAN, gamma, y) == pytest.approx(
                gaussian_expected_sqrt(gamma, y), rel=1e-12)


def test_decay_rate_tends_to_one_eighth():
    # (1 - I_gamma) / (I gamma^2) -> 1/8 from below for both densities
    for d in (GAUSSIAN, LOGISTIC):
        rates = [(1.0 - sqrt_ratio_mean(d, g)) / (d.fisher_info * g * g)
                 for g in (0.5, 0.25, 0.1)]
        assert rates[0] < rates[1] < rates[2] < 0.125
        assert rates[2] == pytest.approx(0.125, abs=2e-3)


def test_check_expected_sqrt_passes():
    rep = check_expected_sqrt(gammas=(0.5, 2.0), ys=(1.0, 4.0), N=50_000,
                              rng=oracles.make_philox_stream(501, 0))
    assert rep.passed and not rep.skipped
    assert rep.lemma_id == "expected_sqrt"
    assert rep.n_samples == 50_000


def test_check_lemma1_exact_passes_and_validates():
    rep = check_lemma1_cf(0.5, 1.0, N=50_000,
                          rng=oracles.make_philox_stream(502, 0),
                          target="exact")
    assert rep.passed
    assert rep.statistic <= rep.bound_or_target
    with pytest.raises(ValueError, match="Gaussian"):
        check_lemma1_cf(0.5, 1.0, N=1000,
                        rng=oracles.make_philox_stream(502, 1),
                        target="exact", d=LOGISTIC)
    with pytest.raises(ValueError, match="rng"):
        check_lemma1_cf(0.5, 1.0, N=1000)


def test_check_lemma1_limit_scales_tolerance():
    rep = check_lemma1_cf(0.05, 1.0, N=30_000,
                          rng=oracles.make_philox_stream(503, 0),
                          target="limit", tol=0.12)
    assert rep.passed
    assert rep.bound_or_target == 0.12
    assert 0.0 < rep.statistic < 0.12


def test_check_lemma2_same_point_is_degenerate():
    # y1 = y2 gives an exactly-zero moment and margin 0
    rep = check_lemma2_holder(0.5, 2.0, 2.0, N=5_000,
                              rng=oracles.make_philox_stream(504, 0))
    assert rep.passed
    assert rep.statistic <= 0.0


def test_check_lemma2_passes_both_sign_patterns():
    rep = check_lemma2_holder(0.5, 1.0, 0.25, N=100_000,
                              rng=oracles.make_philox_stream(505, 0))
    assert rep.passed
    rep = check_lemma2_holder(0.5, -1.0, 2.0, N=100_000,
                              rng=oracles.make_philox_stream(505, 1))
    assert rep.passed


def test_check_lemma3_skips_when_gamma_too_large():
    # gaussian rate (1 - e^{-g^2/8})/g^2 drops below 0.1 near gamma = 3
    rep = check_lemma3_decay(3.0, N=1000,
                             rng=oracles.make_philox_stream(506, 0))
    assert rep.skipped and rep.passed
    assert rep.details.startswith("skipped:")
    with pytest.raises(ValueError, match="1/8"):
        check_lemma3_decay(0.5, c=0.2, N=1000,
                           rng=oracles.make_philox_stream(506, 1))


def test_check_lemma3_passes_at_small_gamma():
    rep = check_lemma3_decay(0.5, N=100_000,
                             rng=oracles.make_philox_stream(507, 0))
    assert rep.passed and not rep.skipped


def test_check_lemma5_tail_small_run():
    rep = check_lemma5_tail(0.5, N=2_000,
                            rng=oracles.make_philox_stream(508, 0))
    assert rep.passed and not rep.skipped
    assert rep.n_samples == 2_000
    with pytest.raises(ValueError, match="1/12"):
        check_lemma5_tail(0.5, b=0.1, N=100,
                          rng=oracles.make_philox_stream(508, 1))


def test_suite_reduced_scale_gaussian():
    reports = run_verify_suite(seed=12345, scale=0.02)
    assert [r.lemma_id for r in reports] == [
        "expected_sqrt", "lemma1_cf_exact", "lemma1_cf_limit",
        "lemma2_holder", "lemma2_holder", "lemma3_decay", "lemma3_decay",
        "lemma5_tail", "lemma5_tail"]
    for r in reports:
        assert r.passed, format_report_line(r)
        if not r.skipped:
            assert r.passed == (r.statistic <= r.bound_or_target)
    assert not any(r.skipped for r in reports)


def test_suite_reduced_scale_logistic():
    reports = run_verify_suite(seed=54321, scale=0.01, d=LOGISTIC)
    assert len(reports) == 9
    # the finite-gamma closed form only exists for gaussian jumps
    assert reports[1].skipped and reports[1].passed
    for r in reports:
        assert r.passed, format_report_line(r)


def test_suite_deterministic():
    a = run_verify_suite(seed=777, scale=0.003)
    b = run_verify_suite(seed=777, scale=0.003)
    assert a == b
    with pytest.raises(ValueError):
        run_verify_suite(scale=0.0)


def test_report_serialization():
    import json
    reports = run_verify_suite(seed=999, scale=0.003)
    lines = [format_report_line(r) for r in reports]
    assert all(l.startswith(("PASS", "FAIL", "SKIP")) for l in lines)
    payload = json.loads(reports_to_json(reports))
    assert len(payload) == 9
    assert payload[0]["lemma_id"] == "expected_sqrt"
    assert payload[0]["pass"] is True
    assert {"statistic", "bound_or_target", "n_samples",
            "details"} <= set(payload[0])
