import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from argmaxgauss.core import CriterionSpec, ParameterGrid
from argmaxgauss.gaussian import GaussianModel, analytic_model
from argmaxgauss.theorycheck import (
    EuclideanCompact,
    PowerLaw,
    RateSpec,
    anti_concentration_bound,
    anti_concentration_check,
    approximation_delta,
    derivative_bound_check,
    entropy_integral,
    independent_pair_band_probability,
    rate_bound,
    smoothed_indicator,
    soft_step,
    soft_step_reference,
    softmax,
    softmax_gap_bound,
)


class TestSoftmax:
    def test_equal_entries(self):
        assert softmax([0.0, 0.0], 1.0) == pytest.approx(math.log(2))

    def test_dominant_entry(self):
        assert softmax([10.0, 0.0, 0.0], 5.0) == pytest.approx(10.0, abs=1e-20)

    def test_subset(self):
        assert softmax([5.0, 1.0, 1.0], 1.0, [1, 2]) == pytest.approx(1 + math.log(2))

    def test_overflow_safe(self):
        assert softmax([1e6, 1e6], 1e3) == pytest.approx(1e6 + math.log(2) / 1e3)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            softmax([1.0], 0.0)
        with pytest.raises(ValueError):
            softmax([1.0, 2.0], 1.0, [])

    @settings(max_examples=500, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=12), st.floats(0.01, 50))
    def test_sandwich(self, values, beta):
        x = np.array(values)
        gap = softmax(x, beta) - x.max()
        assert -1e-9 <= gap <= softmax_gap_bound(beta, x.size) + 1e-9


class TestSoftStep:
    def test_flat_parts(self):
        assert soft_step(0.0, 1.0) == 1.0
        assert soft_step(-1.0, 1.0) == 0.0
        assert soft_step(5.0, 0.3) == 1.0 and soft_step(-5.0, 0.3) == 0.0

    def test_midpoint(self):
        assert soft_step(-0.5, 1.0) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("z", [-0.9999, -0.9, -0.7, -0.5, -0.31, -0.0003, -0.0001])
    def test_matches_quadrature(self, z):
        assert soft_step(z, 1.0) == pytest.approx(soft_step_reference(z, 1.0), abs=1e-8)

    def test_rejects_nonpositive_delta(self):
        with pytest.raises(ValueError):
            soft_step(0.0, 0.0)

    @settings(max_examples=500, deadline=None)
    @given(st.floats(-5, 5), st.floats(-5, 5), st.sampled_from([0.1, 1.0, 10.0]))
    def test_monotone_and_sandwiched(self, z1, z2, delta):
        lo, hi = sorted((z1 * delta, z2 * delta))
        assert soft_step(lo, delta) <= soft_step(hi, delta) + 1e-15
        for z in (lo, hi):
            assert float(z >= 0) <= soft_step(z, delta) <= float(z >= -delta)


class TestDerivative:
    def test_bound_holds_for_four_points(self):
        rep = derivative_bound_check(4, 1.0, 0.5, [0, 1], 100, seed=12345)
        assert rep.passed and rep.max_first_order <= 4.004
        assert rep.bound == pytest.approx(4.0)

    def test_smoothed_indicator_limits(self):
        x = np.array([3.0, 0.0, 0.0])
        assert smoothed_indicator(x, 50.0, 0.1, [0], 0.0) == 1.0
        assert smoothed_indicator(-x, 50.0, 0.1, [0], 0.0) == 0.0

    def test_size_range(self):
        with pytest.raises(ValueError):
            derivative_bound_check(13, 1.0, 0.5, [0], 1, seed=1)

    def test_second_order_reported(self):
        rep = derivative_bound_check(3, 1.0, 0.5, [0], 3, seed=2, second_order=True)
        assert rep.max_second_order >= 0


class TestAntiConcentration:
    def test_independent_pair(self):
        p = independent_pair_band_probability(0.1)
        assert p == pytest.approx(0.0564, abs=1e-4)
        assert p <= anti_concentration_bound(0.1, 1.0, 2)

    def test_zero_epsilon(self):
        assert independent_pair_band_probability(0.0) == 0.0
        assert anti_concentration_bound(0.0, 1.0, 5) == 0.0
        model = GaussianModel.from_moments(ParameterGrid.linspace(0, 1, 2), [0.0, 0.0], np.eye(2), "test")
        rep = anti_concentration_check(model, [0], 0.0, 1.0, 10_000, seed=1)
        assert rep.max_band_prob == 0.0 and rep.passed

    def test_monte_carlo_pair_matches_exact(self):
        model = GaussianModel.from_moments(ParameterGrid.linspace(0, 1, 2), [0.0, 0.0], np.eye(2), "test")
        rep = anti_concentration_check(model, [0], 0.1, 1.0, 200_000, seed=7)
        k = int(np.argmin(np.abs(rep.r_grid)))
        assert abs(rep.band_prob[k] - independent_pair_band_probability(0.1)) <= 4 * rep.band_se[k]

    def test_cube_root_window(self):
        model = analytic_model(CriterionSpec.cube_root(), ParameterGrid.linspace(0, 1, 11))
        rep = anti_concentration_check(model, range(5), 0.05, math.sqrt(0.1), 50_000, seed=3)
        assert rep.passed

    def test_full_subset_rejected(self):
        model = GaussianModel.from_moments(ParameterGrid.linspace(0, 1, 2), [0.0, 0.0], np.eye(2), "test")
        with pytest.raises(ValueError):
            anti_concentration_check(model, [0, 1], 0.1, 1.0, 100, seed=1)


class TestEntropy:
    def test_zero_entropy(self):
        assert entropy_integral(lambda d: 0.0, 0.3) == pytest.approx(0.3, rel=1e-10)

    def test_power_law_alpha_one(self):
        assert entropy_integral(PowerLaw(1.0), 1.0) == pytest.approx(math.sqrt(2) + math.asinh(1), abs=1e-8)
        assert entropy_integral(PowerLaw(1.0), 1.0) == pytest.approx(2.2955871494, abs=1e-8)

    def test_alpha_two_rejected(self):
        with pytest.raises(ValueError):
            PowerLaw(2.0)

    def test_epsilon_range(self):
        with pytest.raises(ValueError):
            entropy_integral(PowerLaw(1.0), 0.0)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(1e-4, 1.0), st.floats(1e-4, 1.0))
    def test_monotone_and_at_least_epsilon(self, e1, e2):
        h = EuclideanCompact(2, 1.0)
        lo, hi = sorted((e1, e2))
        j_lo, j_hi = entropy_integral(h, lo), entropy_integral(h, hi)
        assert j_lo >= lo * (1 - 1e-10) and j_lo <= j_hi + 1e-12

    def test_approximation_delta_decreases_in_n(self):
        h = EuclideanCompact(1, 2.0)
        assert approximation_delta(10_000, 0.1, h) < approximation_delta(100, 0.1, h)


class TestRates:
    def test_finite_dim(self):
        assert rate_bound(RateSpec(), 10_000)["value"] == pytest.approx(10_000 ** -0.625 * math.log(10_000))

    def test_infinite_dim_binding(self):
        res = rate_bound(RateSpec("infinite_dim", alpha=0.5, kappa=0.25), 100)
        assert res["exponents"] == pytest.approx([0.625, 1.0, 13 / 24])
        assert res["exponent"] == pytest.approx(13 / 24, abs=1e-12)

    def test_small_alpha_entropy_term_never_binds(self):
        res = rate_bound(RateSpec("infinite_dim", alpha=0.01, kappa=0.1), 100)
        assert res["exponents"][1] > 80
        assert res["exponent"] == pytest.approx(4.49 / 7.2) and res["exponent"] <= 5 / 8

    def test_precondition(self):
        with pytest.raises(ValueError):
            RateSpec("infinite_dim", alpha=1.5, kappa=0.5)
        with pytest.raises(ValueError):
            RateSpec("sideways")
        with pytest.raises(ValueError):
            rate_bound(RateSpec(), 1)

    def test_continuous_in_alpha(self):
        a = rate_bound(RateSpec("infinite_dim", alpha=1.0, kappa=0.2), 500)["exponent"]
        b = rate_bound(RateSpec("infinite_dim", alpha=1.0 + 1e-9, kappa=0.2), 500)["exponent"]
        assert a == pytest.approx(b, abs=1e-7)
