import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from argmaxgauss.core import ArgmaxDistribution, CriterionSpec, ParameterGrid
from argmaxgauss.estimator import DataGenSpec
from argmaxgauss.gaussian import (
    DegenerateSamplerError,
    FactorizationError,
    GaussianModel,
    NoClosedFormError,
    analytic_model,
    cholesky_with_jitter,
    discrepancy_report,
    distribution_distance,
    interval_ks,
    lad_printed_covariance,
    lad_printed_covariance_decomposed,
    mc_model,
    quadrature_model,
    sample_argmax_distribution,
    total_variation,
    tv_standard_error,
)
from argmaxgauss.gaussian import sample_argmax_indices


class TestFactorization:
    def test_positive_definite_needs_no_jitter(self):
        chol, jitter = cholesky_with_jitter(np.eye(3))
        assert jitter == 0 and np.allclose(chol, np.eye(3))

    def test_semidefinite_gets_jitter(self):
        v = np.array([1.0, 2.0, 3.0])
        chol, jitter = cholesky_with_jitter(np.outer(v, v))
        assert 0 < jitter <= 1e-6 * 14 / 3
        assert np.linalg.norm(chol @ chol.T - np.outer(v, v) - jitter * np.eye(3)) < 1e-8 * 14

    def test_zero_matrix(self):
        chol, jitter = cholesky_with_jitter(np.zeros((2, 2)))
        assert jitter == 0 and not chol.any()

    def test_indefinite_fails(self):
        with pytest.raises(FactorizationError):
            cholesky_with_jitter(np.array([[1.0, 0.0], [0.0, -1.0]]))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 8), st.integers(0, 2**32 - 1), st.integers(1, 8))
    def test_reconstruction(self, m, seed, rank):
        a = np.random.default_rng(seed).normal(size=(m, rank))
        model = GaussianModel.from_moments(ParameterGrid.linspace(0, 1, m) if m > 1
                                           else ParameterGrid.from_points([0.0]), np.zeros(m), a @ a.T, "test")
        assert model.reconstruction_error() <= 1e-8


class TestAnalyticModel:
    def test_window_printed_entries(self):
        g = ParameterGrid.linspace(0, 1, 5)
        model = analytic_model(CriterionSpec.cube_root(), g)
        assert model.cov[1, 3] == pytest.approx(1.25)
        np.testing.assert_array_equal(model.mean, 0.5)

    def test_single_point(self):
        model = analytic_model(CriterionSpec.cube_root(), ParameterGrid.from_points([0.2]))
        assert model.chol.shape == (1, 1) and model.chol[0, 0] == pytest.approx(np.sqrt(1.75))

    def test_window_exact_law(self):
        g = ParameterGrid.linspace(-1, 1, 5)
        model = analytic_model(CriterionSpec.cube_root(), g, DataGenSpec.uniform(-2, 2))
        d = np.abs(g.values()[:, None] - g.values()[None, :])
        np.testing.assert_allclose(model.cov, (1 - d) / 4, atol=1e-15)

    def test_lad_needs_flag(self, lad, lad_grid):
        with pytest.raises(NoClosedFormError):
            analytic_model(lad, lad_grid)

    def test_lad_printed_form_available(self, lad):
        g = ParameterGrid.linspace(0, 0.5, 3)
        model = analytic_model(lad, g, printed_formula=True)
        assert model.mean[0] == pytest.approx(-4.5)

    def test_min_volume_printed_form_not_factorizable(self):
        spec = CriterionSpec.min_volume(0.2, 0.1)
        with pytest.raises(FactorizationError):
            analytic_model(spec, ParameterGrid.linspace(0.2, 0.8, 5), printed_formula=True)


class TestMonteCarloModel:
    def test_lad_within_three_standard_errors_of_quadrature(self, lad):
        g = ParameterGrid.linspace(0, 0.5, 6)
        law = DataGenSpec.uniform_pair(0.25, 0.25)
        mc = mc_model(lad, g, law, 100_000, seed=5)
        oracle = quadrature_model(lad, g, law)
        assert np.all(np.abs(mc.cov - oracle.cov) <= 3 * mc.cov_se + 1e-15)
        assert np.all(np.abs(mc.mean - oracle.mean) <= 3 * mc.mean_se)

    def test_window_matches_exact_moments(self):
        g = ParameterGrid.linspace(-1, 1, 5)
        law = DataGenSpec.uniform(-2, 2)
        mc = mc_model(CriterionSpec.cube_root(), g, law, 100_000, seed=9)
        exact = analytic_model(CriterionSpec.cube_root(), g, law)
        assert np.all(np.abs(mc.cov - exact.cov) <= 3 * mc.cov_se + 1e-15)

    def test_constant_table_gives_zero_covariance(self):
        spec = CriterionSpec.tabulated(np.ones((3, 4)))
        model = mc_model(spec, ParameterGrid.linspace(0, 1, 3), DataGenSpec.table_columns(4), 1000, seed=1)
        assert not model.cov.any()

    def test_degenerate_sampler(self):
        spec = CriterionSpec.tabulated(np.ones((2, 1)))
        with pytest.raises(DegenerateSamplerError):
            mc_model(spec, ParameterGrid.linspace(0, 1, 2), DataGenSpec.table_columns(1), 1000, seed=1)

    def test_too_few_samples(self, lad, lad_grid):
        with pytest.raises(ValueError):
            mc_model(lad, lad_grid, DataGenSpec.uniform_pair(0.25, 0.25), 10, seed=1)

    def test_reproducible(self, lad, lad_grid):
        law = DataGenSpec.uniform_pair(0.25, 0.25)
        a, b = (mc_model(lad, lad_grid, law, 2000, seed=4) for _ in range(2))
        np.testing.assert_array_equal(a.cov, b.cov)


class TestSampling:
    def test_zero_covariance_picks_mean_argmax(self):
        g = ParameterGrid.linspace(0, 1, 3)
        model = GaussianModel.from_moments(g, [0.0, 1.0, 0.0], np.zeros((3, 3)), "test")
        assert sample_argmax_distribution(model, 50, 1).masses[1] == 1.0

    def test_single_point(self):
        g = ParameterGrid.from_points([0.0])
        model = GaussianModel.from_moments(g, [0.0], [[2.0]], "test")
        assert sample_argmax_distribution(model, 10, 1).masses[0] == 1.0

    def test_bitwise_reproducible(self):
        g = ParameterGrid.linspace(0, 1, 21)
        model = analytic_model(CriterionSpec.cube_root(), g)
        a = sample_argmax_distribution(model, 3000, 99)
        b = sample_argmax_distribution(model, 3000, 99, workers=3)
        np.testing.assert_array_equal(a.masses, b.masses)

    def test_scaling_invariance_of_centered_draws(self):
        g = ParameterGrid.linspace(0, 1, 11)
        base = analytic_model(CriterionSpec.cube_root(), g)
        centered = GaussianModel.from_moments(g, np.zeros(11), base.cov, "test")
        for c in (0.01, 3.0, 250.0):
            scaled = GaussianModel.from_moments(g, np.zeros(11), c * base.cov, "test")
            np.testing.assert_array_equal(sample_argmax_indices(centered, 2000, 5),
                                          sample_argmax_indices(scaled, 2000, 5))

    def test_scaled_divides_covariance(self):
        g = ParameterGrid.linspace(0, 1, 4)
        model = analytic_model(CriterionSpec.cube_root(), g).scaled(100)
        np.testing.assert_allclose(model.cov[0, 0], 0.0175)
        assert model.reconstruction_error() < 1e-12


class TestDistances:
    def grid(self, m=3):
        return ParameterGrid.linspace(0, 1, m)

    def test_identical(self):
        p = ArgmaxDistribution(np.array([0.2, 0.3, 0.5]), 10, None, self.grid())
        assert distribution_distance(p, p) == 0

    def test_disjoint_point_masses(self):
        g = self.grid(2)
        assert distribution_distance(ArgmaxDistribution.point_mass(0, g), ArgmaxDistribution.point_mass(1, g)) == 1

    def test_half_overlap(self):
        g = self.grid()
        p = ArgmaxDistribution(np.array([0.5, 0.5, 0]), 2, None, g)
        q = ArgmaxDistribution(np.array([0, 0.5, 0.5]), 2, None, g)
        assert distribution_distance(p, q) == pytest.approx(0.5)
        assert distribution_distance(p, q, "interval_ks") == pytest.approx(0.5)

    def test_grid_mismatch(self):
        with pytest.raises(ValueError):
            distribution_distance(ArgmaxDistribution.point_mass(0, self.grid(2)),
                                  ArgmaxDistribution.point_mass(0, self.grid(3)))

    @settings(max_examples=300, deadline=None)
    @given(st.integers(2, 12), st.integers(0, 2**32 - 1))
    def test_metric_axioms_and_ordering(self, m, seed):
        rng = np.random.default_rng(seed)
        p, q, r = rng.dirichlet(np.ones(m), size=3)
        assert total_variation(p, q) >= 0
        assert total_variation(p, q) == pytest.approx(total_variation(q, p), abs=1e-15)
        assert total_variation(p, r) <= total_variation(p, q) + total_variation(q, r) + 1e-12
        assert interval_ks(p, q) <= total_variation(p, q) + 1e-12

    def test_tv_standard_error_positive(self):
        g = self.grid()
        p = ArgmaxDistribution(np.array([0.2, 0.3, 0.5]), 1000, None, g)
        q = ArgmaxDistribution(np.array([0.3, 0.3, 0.4]), 1000, None, g)
        se = tv_standard_error(p, q, seed=1)
        assert 0 < se < 0.05


class TestDiscrepancy:
    def test_lad_report_flags_printed_form(self, lad):
        g = ParameterGrid.linspace(0, 0.5, 6)
        report = discrepancy_report(lad, g, DataGenSpec.uniform_pair(0.25, 0.25))
        assert not report["consistent"]
        assert report["max_abs_mean_diff"] == pytest.approx(4.25)

    def test_lad_printed_forms_internally_disagree(self):
        assert lad_printed_covariance(0.1, 0.3) != pytest.approx(lad_printed_covariance_decomposed(0.1, 0.3))

    def test_min_volume_report(self):
        spec = CriterionSpec.min_volume(0.2, 0.1)
        report = discrepancy_report(spec, ParameterGrid.linspace(0.2, 0.8, 7), DataGenSpec.min_volume_pair())
        assert report["printed_cov_increases_with_distance"]
        assert report["oracle_cov_corner"] < 0

    def test_quadrature_lad_covariance_direct(self, lad):
        # E|U - a||U - b| - E|U - a| E|U - b| for U ~ U[-1/4, 1/4], by a fine Riemann sum
        g = ParameterGrid.from_points([0.1, 0.4])
        model = quadrature_model(lad, g, DataGenSpec.uniform_pair(0.25, 0.25))
        u = (np.arange(2_000_000) + 0.5) / 2_000_000 * 0.5
        a, b = np.abs(u - 0.1), np.abs(u - 0.4)
        assert model.cov[0, 1] == pytest.approx(np.mean(a * b) - a.mean() * b.mean(), abs=1e-10)
