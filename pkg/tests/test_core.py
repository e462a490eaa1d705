import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from argmaxgauss.core import (
    ArgmaxDistribution,
    CriterionError,
    CriterionSpec,
    DomainError,
    InvalidCriterionError,
    ParameterGrid,
    SampleSet,
    argmax_index,
    argmax_rows,
    criterion_table,
    empirical_criterion,
    evaluate_criterion,
)


class TestEvaluateCriterion:
    def test_window_contains_point(self):
        assert evaluate_criterion(CriterionSpec.cube_root(), 0.5, 0.3) == 1.0

    def test_window_excludes_point(self):
        assert evaluate_criterion(CriterionSpec.cube_root(), 0.0, 1.4) == 0.0

    def test_lad_absolute_residual(self):
        assert evaluate_criterion(CriterionSpec.lad(), 0.5, (0.2, 1.0)) == pytest.approx(0.3, abs=1e-15)

    def test_min_volume_outside_band_is_zero(self):
        spec = CriterionSpec.min_volume(width=0.3, bandwidth=0.1, x0=0.5, kernel="uniform")
        assert evaluate_criterion(spec, 0.5, (0.5, 0.9)) == 0.0

    def test_min_volume_inside_band_is_kernel_weight(self):
        spec = CriterionSpec.min_volume(width=0.3, bandwidth=0.1, x0=0.5, kernel="uniform")
        assert evaluate_criterion(spec, 0.5, (0.5, 0.6)) == pytest.approx(float(spec.kernel_weight(0.5)))

    def test_tabulated_lookup(self):
        spec = CriterionSpec.tabulated([[1.0, 2.0], [3.0, 4.0]])
        assert evaluate_criterion(spec, 1, 0) == 3.0

    def test_tabulated_out_of_range(self):
        spec = CriterionSpec.tabulated([[1.0, 2.0]])
        with pytest.raises(DomainError):
            evaluate_criterion(spec, 0, 5)

    def test_unknown_kind_rejected(self):
        with pytest.raises(CriterionError):
            CriterionSpec("quantile")

    def test_lad_observation_outside_box(self):
        with pytest.raises(DomainError):
            evaluate_criterion(CriterionSpec.lad(y_bound=1.0), 0.1, (5.0, 1.0))


@settings(max_examples=200, deadline=None)
@given(theta=st.floats(-1, 1), y=st.floats(-1, 1), x=st.floats(-1, 1), z=st.floats(-5, 5))
def test_builtin_criteria_within_envelope(theta, y, x, z):
    cube, lad = CriterionSpec.cube_root(), CriterionSpec.lad()
    assert evaluate_criterion(cube, theta, z) in (0.0, 1.0)
    value = evaluate_criterion(lad, theta, (y, x))
    assert 0.0 <= value <= lad.envelope


@settings(max_examples=100, deadline=None)
@given(theta=st.floats(0, 1), x=st.floats(0, 1), y=st.floats(0, 1))
def test_min_volume_within_envelope(theta, x, y):
    spec = CriterionSpec.min_volume(width=0.2, bandwidth=0.05)
    assert 0.0 <= evaluate_criterion(spec, theta, (x, y)) <= spec.envelope


class TestEmpiricalCriterion:
    def test_window_counts(self):
        grid = ParameterGrid.from_points([0.0, 0.5])
        q = empirical_criterion(CriterionSpec.cube_root(), grid, SampleSet([0.3, 1.4]))
        np.testing.assert_array_equal(q, [0.5, 1.0])

    def test_lad_mean_absolute(self):
        grid = ParameterGrid.from_points([0.0])
        q = empirical_criterion(CriterionSpec.lad(), grid, SampleSet([[0.2, 1.0], [0.4, 1.0]]))
        np.testing.assert_allclose(q, [0.3], rtol=1e-15)

    def test_zero_table(self):
        grid = ParameterGrid.linspace(0, 1, 3)
        spec = CriterionSpec.tabulated(np.zeros((3, 4)))
        np.testing.assert_array_equal(empirical_criterion(spec, grid, SampleSet([0, 1, 3])), 0.0)

    def test_permutation_invariant(self, rng):
        grid = ParameterGrid.linspace(-1, 1, 9)
        z = rng.uniform(-2, 2, 50)
        spec = CriterionSpec.cube_root()
        a = empirical_criterion(spec, grid, SampleSet(z))
        b = empirical_criterion(spec, grid, SampleSet(z[rng.permutation(50)]))
        np.testing.assert_array_equal(a, b)

    def test_table_shape(self):
        grid = ParameterGrid.linspace(0, 1, 4)
        assert criterion_table(CriterionSpec.cube_root(), grid, SampleSet([0.1, 0.2, 0.3])).shape == (4, 3)


class TestArgmax:
    @pytest.mark.parametrize("values, expected", [((0.1, 0.5, 0.3), 1), ((0.5, 0.5), 0), ((-1, -2, -0.5), 2)])
    def test_examples(self, values, expected):
        assert argmax_index(values) == expected

    def test_nan_rejected(self):
        with pytest.raises(InvalidCriterionError):
            argmax_index([0.0, np.nan])

    def test_rows_match_scalar(self, rng):
        v = rng.integers(0, 3, size=(50, 6)).astype(float)
        assert list(argmax_rows(v)) == [argmax_index(row) for row in v]

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(-50, 50), min_size=1, max_size=20),
           st.integers(-1000, 1000), st.integers(1, 1000))
    def test_affine_invariance(self, values, shift, scale):
        v = np.array(values, dtype=float)
        assert argmax_index(v) == argmax_index(v + shift) == argmax_index(v * scale)


class TestParameterGrid:
    def test_linspace_spacing_and_bounds(self):
        g = ParameterGrid.linspace(0, 1, 11)
        assert g.size == 11 and g.spacing == pytest.approx(0.1)
        assert g.lower[0] == 0 and g.upper[0] == 1

    def test_single_point(self):
        g = ParameterGrid.linspace(0.3, 0.3, 1)
        assert g.size == 1

    def test_product_is_lexicographic(self):
        g = ParameterGrid.product([[0, 1], [0, 1, 2]], ["theta", "eta"])
        assert g.shape == (2, 3)
        np.testing.assert_array_equal(g.points[:4], [[0, 0], [0, 1], [0, 2], [1, 0]])

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            ParameterGrid.from_points([0.5, 0.1])

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            ParameterGrid.from_points([0.1, 0.1])

    def test_packing_distance(self):
        g = ParameterGrid.product([np.linspace(0, 1, 4), np.linspace(0, 1, 5)])
        d = np.sqrt(((g.points[:, None] - g.points[None]) ** 2).sum(-1))
        assert d[np.triu_indices(g.size, 1)].min() >= g.spacing - 1e-12

    def test_nearest_index_tie_goes_low(self):
        g = ParameterGrid.from_points([0.0, 1.0])
        assert g.nearest_index(0.5) == 0

    def test_csv_roundtrip(self, tmp_path):
        g = ParameterGrid.product([[0.0, 0.5], [1.0, 2.0, 3.0]], ["theta", "eta"])
        g.to_csv(tmp_path / "g.csv")
        back = ParameterGrid.from_csv(tmp_path / "g.csv")
        np.testing.assert_array_equal(back.points, g.points)
        assert back.labels == g.labels


class TestSampleSet:
    def test_split_halves(self):
        first, second = SampleSet(np.arange(5.0)).split()
        assert first.n == 3 and second.n == 2

    def test_csv_roundtrip(self, tmp_path):
        s = SampleSet([[0.1, 1.0], [0.2, 0.5]])
        s.to_csv(tmp_path / "s.csv", kind="lad")
        np.testing.assert_array_equal(SampleSet.from_csv(tmp_path / "s.csv").observations, s.observations)


class TestArgmaxDistribution:
    def test_from_indices(self):
        g = ParameterGrid.linspace(0, 1, 3)
        d = ArgmaxDistribution.from_indices([0, 2, 2, 2], g)
        np.testing.assert_allclose(d.masses, [0.25, 0, 0.75])
        assert d.mode() == 2

    def test_rejects_bad_masses(self):
        with pytest.raises(ValueError):
            ArgmaxDistribution(np.array([0.5, 0.6]), 1, None, ParameterGrid.linspace(0, 1, 2))
