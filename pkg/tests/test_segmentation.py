"""Tests for 1D jump extraction, the dual certificate check, and outcome scoring."""
import numpy as np
import pytest

from tvdn.grid import Signal
from tvdn.lambda_stat import sample_lambda_1d
from tvdn.segmentation import (SegmentationOutcome, evaluate_outcome,
                               extract_jumps, kkt_check)
from tvdn.selection import (exact_seg_threshold, min_jump_height,
                            universal_threshold_1d)
from tvdn.signals import PiecewiseConstantSpec, gen_piecewise, gen_test_function
from tvdn.tvsolve import tv_denoise_1d


def test_extract_jumps_constant_empty():
    f = Signal.from_array(np.full(50, 3.25))
    assert extract_jumps(f).size == 0
    assert extract_jumps(f, sigma=1.0, rule="calibrated").size == 0


def test_extract_jumps_battlements_locations():
    spec = gen_piecewise("battlements", 100, 5, 2.0)
    f = spec.realize()
    np.testing.assert_array_equal(extract_jumps(f), [20, 40, 60, 80])
    np.testing.assert_array_equal(spec.jump_locations, [20, 40, 60, 80])


def test_extract_jumps_calibrated_removes_small_steps():
    # one step of height 0.1: kept by the nonzero rule, dropped by the
    # calibrated rule at sigma=1 (threshold ~0.49 for N=100)
    v = np.zeros(100)
    v[50:] = 0.1
    f = Signal.from_array(v)
    np.testing.assert_array_equal(extract_jumps(f, sigma=1.0, rule="nonzero"), [50])
    assert extract_jumps(f, sigma=1.0, rule="calibrated").size == 0


def test_extract_jumps_explicit_tolerance():
    v = np.zeros(10)
    v[5:] = 0.5
    f = Signal.from_array(v)
    np.testing.assert_array_equal(extract_jumps(f, tolerance=0.4), [5])
    assert extract_jumps(f, tolerance=0.6).size == 0


def test_extract_jumps_errors():
    f2 = Signal.from_array(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        extract_jumps(f2)
    f = Signal.from_array(np.arange(4.0))
    with pytest.raises(ValueError):
        extract_jumps(f, rule="bogus")


def test_kkt_no_jump_iff_lambda_stat():
    # the empty segmentation is optimal exactly when lambda is at least the
    # dual sup-norm statistic of the data
    rng = np.random.default_rng(1)
    for _ in range(20):
        y = Signal.from_array(rng.normal(size=int(rng.integers(5, 60))))
        lam0 = sample_lambda_1d(y)
        holds_hi, h_hi, _, _ = kkt_check(y, [], lam0 * 1.0000001)
        holds_lo, _, _, _ = kkt_check(y, [], lam0 * 0.999999)
        assert holds_hi and not holds_lo
        assert h_hi.shape == (1,)
        assert h_hi[0] == pytest.approx(float(np.mean(y.values)))


def test_kkt_noiseless_battlements_holds():
    sigma = 1.0
    hstar = min_jump_height(sigma, 0.05)
    spec = gen_piecewise("battlements", 100, 5, 2.0 * hstar)
    y0 = spec.realize()
    lam = exact_seg_threshold(20, sigma, 0.05)
    holds, h_hat, w, max_w = kkt_check(y0, spec.jump_locations, lam)
    assert holds
    assert max_w == pytest.approx(lam, rel=1e-10)
    assert h_hat.shape == (5,)
    assert w.shape == (99,)
    # fitted levels keep the alternating order of the true pieces
    # (jump_signs pads a zero at each boundary)
    assert np.all(np.sign(np.diff(h_hat)) == spec.jump_signs[1:-1])


def test_kkt_dual_boundary_values():
    # telescoping makes the dual hit lambda times the mean-order sign at
    # every candidate jump, for any candidate partition
    rng = np.random.default_rng(3)
    y = Signal.from_array(rng.normal(size=40))
    locs = [7, 19, 26]
    lam = 1.3
    _, _, w, _ = kkt_check(y, locs, lam)
    bounds = np.concatenate(([0], locs, [40]))
    cums = np.concatenate(([0.0], np.cumsum(y.values)))
    means = (cums[bounds[1:]] - cums[bounds[:-1]]) / np.diff(bounds)
    s = np.sign(np.diff(means))
    np.testing.assert_allclose(w[np.asarray(locs) - 1], lam * s, atol=1e-10)


def test_kkt_staircase_rarely_certified():
    # monotone staircases violate the sign-alternation needed by the dual
    # certificate at this threshold, so the hold frequency collapses
    sigma = 1.0
    hstar = min_jump_height(sigma, 0.05)
    spec = gen_piecewise("staircase", 100, 5, 2.0 * hstar)
    f0 = spec.realize()
    lam = exact_seg_threshold(20, sigma, 0.05)
    reps = 50
    count = 0
    for child in np.random.SeedSequence(9).spawn(reps):
        rng = np.random.default_rng(child)
        y = Signal(f0.shape, f0.values + sigma * rng.standard_normal(100))
        holds, _, _, _ = kkt_check(y, spec.jump_locations, lam)
        count += holds
    assert count / reps <= 0.02


def test_kkt_invalid_inputs():
    y = Signal.from_array(np.arange(10.0))
    with pytest.raises(ValueError):
        kkt_check(y, [0], 1.0)
    with pytest.raises(ValueError):
        kkt_check(y, [10], 1.0)
    with pytest.raises(ValueError):
        kkt_check(y, [3, 3], 1.0)
    with pytest.raises(ValueError):
        kkt_check(y, [3], -1.0)
    with pytest.raises(ValueError):
        kkt_check(Signal.from_array(np.zeros((2, 5))), [1], 1.0)


def test_evaluate_outcome_noiseless_exact():
    spec = gen_piecewise("battlements", 100, 5, 2.0)
    out = evaluate_outcome(spec.realize(), spec)
    assert out.exact and out.screening
    assert out.jumps_estimated == out.jumps_true == (20, 40, 60, 80)


def test_evaluate_outcome_constant_fit_misses():
    spec = gen_piecewise("staircase", 60, 3, 1.0)
    flat = Signal.from_array(np.zeros(60))
    out = evaluate_outcome(flat, spec)
    assert not out.exact and not out.screening
    assert out.jumps_estimated == ()
    assert out.jumps_true == (20, 40)


def test_evaluate_outcome_extra_jumps_screen_only():
    spec = gen_piecewise("battlements", 60, 3, 5.0)
    v = spec.realize().values.copy()
    v[5:] += 1.0  # spurious extra step at location 5
    out = evaluate_outcome(Signal.from_array(v), spec)
    assert out.screening and not out.exact
    assert 5 in out.jumps_estimated


def test_outcome_validation():
    with pytest.raises(ValueError):
        SegmentationOutcome((1,), (2,), exact=True, screening=False,
                            kkt_max_dual=0.0)
    spec = gen_piecewise("battlements", 60, 3, 5.0)
    with pytest.raises(ValueError):
        evaluate_outcome(Signal.from_array(np.zeros(59)), spec)
    with pytest.raises(ValueError):
        evaluate_outcome(Signal.from_array(np.zeros((6, 10))), spec)


def test_screening_at_universal_threshold():
    # with mild noise the universal threshold keeps every true jump of the
    # blocks signal detectable by the calibrated rule
    yb = gen_test_function("blocks", 1000)
    spec = PiecewiseConstantSpec.from_values(yb.values)
    sigma = 0.1
    lam = universal_threshold_1d(1000, sigma)
    reps = 30
    count = 0
    for child in np.random.SeedSequence(14).spawn(reps):
        rng = np.random.default_rng(child)
        y = Signal(yb.shape, yb.values + sigma * rng.standard_normal(1000))
        sol = tv_denoise_1d(y, lam)
        out = evaluate_outcome(sol.estimate, spec, sigma, rule="calibrated")
        count += out.screening
    assert count == reps
