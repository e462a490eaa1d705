"""Gaussian approximation of argmax distributions of grid M-estimators.

Modules: ``core`` (criteria, grids, samples), ``estimator`` (M-estimates and
their Monte Carlo law), ``gaussian`` (Gaussian counterpart), ``bootstrap``
(multiplier bootstrap and split-sample test), ``coherence`` (Schur-complement
checks and the linear Toeplitz family), ``theorycheck`` (smoothing devices,
anti-concentration, rates) and ``cli`` (experiment runner).
"""

from .bootstrap import (
    AcceptanceRegion,
    BootstrapRun,
    bootstrap_distribution,
    minimum_volume_region,
    multiplier_draw,
    split_test,
)
from .coherence import (
    CoherenceReport,
    Sampled,
    coherent_pd_check,
    eigen_sufficiency,
    linear_toeplitz,
    toeplitz_cofactors,
    toeplitz_conditional_variance,
)
from .core import (
    ArgmaxDistribution,
    CriterionSpec,
    ParameterGrid,
    SampleSet,
    argmax_index,
    empirical_criterion,
    evaluate_criterion,
)
from .estimator import DataGenSpec, m_estimate, profile_argmax, replicate_estimator, sieve_grid
from .gaussian import (
    GaussianModel,
    analytic_model,
    discrepancy_report,
    distribution_distance,
    mc_model,
    quadrature_model,
    sample_argmax_distribution,
)
from .theorycheck import (
    RateSpec,
    anti_concentration_check,
    derivative_bound_check,
    entropy_integral,
    rate_bound,
    soft_step,
    softmax,
)

__version__ = "0.1.0"
