import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from saddlescape import constants
from saddlescape.concentration import (
    CHECK_COLUMNS,
    KINDS,
    NSGSampler,
    calibrate_constants,
    check_adaptive_sum,
    check_hoeffding_sum,
    check_inner_product,
    check_sum_of_squares,
    run_check,
    sample_nsg,
)


class TestSamplers:
    def test_bounded_never_exceeds_sigma(self):
        X = sample_nsg(NSGSampler("bounded", 0.7, 5, seed=0), 10_000)
        assert np.max(np.linalg.norm(X, axis=1)) <= 0.7

    def test_one_dim_support(self):
        X = sample_nsg(NSGSampler("one_dim_subgaussian", 1.0, 4, seed=1), 1000)
        assert np.all(X[:, 1:] == 0.0)
        assert np.std(X[:, 0]) == pytest.approx(1.0, rel=0.1)

    def test_isotropic_second_moment(self):
        X = sample_nsg(NSGSampler("isotropic_subgaussian", 2.0, 10, seed=2), 100_000)
        assert np.mean(np.sum(X * X, axis=1)) == pytest.approx(4.0, rel=0.02)

    @pytest.mark.parametrize("kind", KINDS)
    def test_zero_mean(self, kind):
        n = 100_000
        X = sample_nsg(NSGSampler(kind, 1.0, 3, seed=3), n)
        se = X.std(axis=0) / math.sqrt(n)
        assert np.all(np.abs(X.mean(axis=0)) <= 4 * se + 1e-15)

    def test_batched_shape(self):
        assert NSGSampler("bounded", 1.0, 3).sample(5, trials=7).shape == (7, 5, 3)

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            NSGSampler("cauchy", 1.0, 3)

    def test_rejects_empty_draw(self):
        with pytest.raises(ValueError):
            sample_nsg(NSGSampler("bounded", 1.0, 3), 0)


class TestHoeffding:
    def test_single_vector(self):
        res = check_hoeffding_sum(NSGSampler("isotropic_subgaussian", 1.0, 10, seed=0), 1, 5.0)
        assert res.passed

    @pytest.mark.parametrize("kind", KINDS)
    def test_passes_at_calibration_point(self, kind):
        res = check_hoeffding_sum(NSGSampler(kind, 1.0, 10, seed=1), 100, 5.0)
        assert res.passed, res.row()

    def test_bounded_is_lighter_than_gaussian(self):
        iota = 2.0
        b = check_hoeffding_sum(NSGSampler("bounded", 1.0, 10, seed=4), 100, iota, C=0.3)
        g = check_hoeffding_sum(NSGSampler("isotropic_subgaussian", 1.0, 10, seed=4), 100, iota, C=0.3)
        assert b.exceedance < g.exceedance

    def test_too_small_constant_fails(self):
        res = check_hoeffding_sum(NSGSampler("isotropic_subgaussian", 1.0, 10, seed=5), 100, 5.0, C=0.05)
        assert not res.passed

    def test_row_columns(self):
        res = check_hoeffding_sum(NSGSampler("bounded", 1.0, 3, seed=0), 10, 5.0, trials=1000)
        assert tuple(res.row()) == CHECK_COLUMNS
        assert res.slack == pytest.approx(3 / math.sqrt(1000))


class TestSquares:
    @pytest.mark.parametrize("kind", KINDS)
    def test_passes(self, kind):
        assert check_sum_of_squares(NSGSampler(kind, 1.0, 10, seed=2), 100, 5.0).passed

    def test_empty_sum_never_exceeds(self):
        res = check_sum_of_squares(NSGSampler("isotropic_subgaussian", 1.0, 10), 0, 5.0)
        assert res.exceedance == 0.0 and res.passed


class TestInnerProduct:
    @pytest.mark.parametrize("rule", ["zero", "fixed", "adversarial"])
    def test_predictable_rules_pass(self, rule):
        s = NSGSampler("isotropic_subgaussian", 1.0, 10, seed=6)
        assert check_inner_product(s, 100, None, 5.0, u_rule=rule).passed

    def test_zero_rule_never_exceeds(self):
        res = check_inner_product(NSGSampler("bounded", 1.0, 3, seed=0), 50, 1.0, 5.0, u_rule="zero")
        assert res.exceedance == 0.0

    def test_lookahead_rejected(self):
        with pytest.raises(ValueError, match="X_1..X_"):
            check_inner_product(NSGSampler("bounded", 1.0, 3), 10, 1.0, 5.0, u_rule="lookahead")

    def test_callable_rule_sees_only_the_past(self):
        seen = []

        def rule(past):
            seen.append(past.shape[1])
            with pytest.raises(ValueError):
                past[...] = 0.0
            return np.ones((past.shape[0], past.shape[2])) / math.sqrt(past.shape[2])

        check_inner_product(NSGSampler("bounded", 1.0, 4, seed=1), 6, 1.0, 5.0, trials=1000, u_rule=rule)
        assert seen == list(range(6))

    def test_nonpositive_lambda(self):
        with pytest.raises(ValueError):
            check_inner_product(NSGSampler("bounded", 1.0, 3), 10, 0.0, 5.0)


class TestAdaptive:
    def test_passes(self):
        res = check_adaptive_sum(trials=2000, seed=3)
        assert res.passed, res.row()
        assert res.lemma == "adaptive"

    def test_needs_enough_trials(self):
        with pytest.raises(ValueError):
            check_adaptive_sum(trials=999)

    def test_run_check_dispatch(self):
        assert run_check("squares", trials=1000).lemma == "squares"
        with pytest.raises(ValueError):
            run_check("bernstein")


class TestCalibration:
    def test_frozen_constants_cover_exact_quantiles(self):
        exact = calibrate_constants(**constants.CALIBRATION_POINT)
        assert exact["hoeffding"] <= constants.HOEFFDING_C
        assert exact["squares"] <= constants.SQUARES_C
        assert exact["inner"] <= constants.INNER_C

    def test_rounded_to_two_decimals(self):
        exact = calibrate_constants(**constants.CALIBRATION_POINT)
        assert constants.HOEFFDING_C - exact["hoeffding"] < 0.01
        assert constants.SQUARES_C - exact["squares"] < 0.01


@given(st.sampled_from(KINDS), st.floats(0.1, 5.0), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_sampler_shapes_and_bounded_radius(kind, sigma, d, seed):
    X = NSGSampler(kind, sigma, d, seed).sample(20)
    assert X.shape == (20, d)
    if kind == "bounded":
        assert np.all(np.linalg.norm(X, axis=1) <= sigma * (1 + 1e-12))
