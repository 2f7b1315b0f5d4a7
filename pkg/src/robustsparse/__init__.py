"""Outlier- and heavy-tail-robust sparse linear regression.

Covariate clipping, l1-penalized Huber regression, and min-max sample
downweighting, composed into two estimators with a synthetic-data harness.
"""

from .core import (
    HuberParams,
    NumericalFailure,
    RegressionSample,
    huber_loss,
    huber_score,
    sigma_norm,
    soft_threshold,
)
from .datagen import (
    ContaminationSpec,
    DistributionSpec,
    TrueModel,
    contaminate,
    draw_outlier_set,
    empirical_kurtosis,
    sample_clean,
)
from .evaluate import ErrorTriple, error_metrics, rate_fit, re_lower_bound, sparse_min_eigen
from .huber_solver import (
    FitResult,
    SolverOptions,
    fit_lasso_baseline,
    fit_penalized_huber,
    huber_objective,
)
from .pipeline import (
    CleanTuning,
    EstimateReport,
    RobustTuning,
    TheoryConstants,
    estimate_i,
    estimate_ii,
    tuning_no_outliers,
    tuning_with_outliers,
)
from .thresholding import ThresholdParam, threshold_matrix
from .weights import (
    InnerMaxResult,
    WeightParams,
    WeightResult,
    WeightVector,
    compute_weights,
    inner_max,
    project_capped_simplex,
    project_psd_trace_ball,
)

__version__ = "0.1.0"
