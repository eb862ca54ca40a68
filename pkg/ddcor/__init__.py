"""
ddcor - Differential distance correlation and friends.

Usage:
    import numpy as np
    from ddcor import PairedSample, compute, independence_test, TestConfig

    rng = np.random.default_rng(7)
    y = rng.uniform(-1, 1, 200)
    x = np.column_stack([np.cos(8 * np.pi * y), y ** 2])

    sample = PairedSample(x=x, y=y)
    compute("ddc", sample).value               # how well y determines x
    independence_test("ddc", sample).p_value   # one-sided asymptotic p-value
    independence_test("hsic", sample, TestConfig(permutations=500, seed=1))

    # Monte-Carlo studies and screening
    from ddcor import coefficient_mean_table, screening_report, SimulationSpec
    coefficient_mean_table(reps=50)
    screening_report(SimulationSpec(model="multi_response", rho=0.5, n=200, p=500, reps=20), "ddc")
"""

from .models import (
    CoefficientEstimate,
    DistanceMoments,
    Method,
    Model,
    MultiResponseDraw,
    Orientation,
    PairedSample,
    PSource,
    ReferenceDistribution,
    Run,
    RunStatus,
    ScreeningReport,
    SimulationSpec,
    SortedPairedSample,
    Step,
    TestConfig,
    TestResult,
    VarianceEstimate,
    selected_size,
)
from .errors import (
    ConfigurationError,
    DataParseError,
    DDCorError,
    DegenerateError,
    DegenerateResponseError,
    DegenerateSampleError,
    DegenerateVarianceError,
    InsufficientSampleError,
    InvalidDataError,
    InvalidParameterError,
)
from .measures import (
    chatterjee_xi,
    compute,
    ddc,
    distance_correlation,
    gini_mean_difference,
    hsic,
    projection_correlation,
    sort_by_response,
)
from .asymptotics import (
    bivariate_normal_ddc,
    chatterjee_asymptotic_pvalue,
    ddc_asymptotic_pvalue,
    ddc_variance_estimate,
    distance_moments,
    distance_variance_sq,
    reference_gini,
    reference_moments,
    reference_sigma_sq,
)
from .inference import independence_test, permutation_pvalue, permutation_test, power_estimate
from .simulation import coefficient_mean_table, generate_example1, generate_example2, power_curve
from .screening import (
    exclusive_discoveries,
    minimal_model_size,
    rank_concordance,
    rank_features,
    screen_dataset,
    screening_power_table,
    screening_report,
    standardize,
)
from .runs import experiment, step, ExperimentWrapper
from .context import get_current_run, RunContext
from .storage import RunStore, InMemoryRunStore, FileRunStore
from .config import configure

__version__ = "0.1.0"

__all__ = [
    "PairedSample", "SortedPairedSample", "CoefficientEstimate", "VarianceEstimate", "DistanceMoments",
    "TestConfig", "TestResult", "SimulationSpec", "MultiResponseDraw", "ScreeningReport",
    "Method", "Model", "Orientation", "PSource", "ReferenceDistribution", "selected_size",
    "DDCorError", "ConfigurationError", "DataParseError", "InvalidDataError", "InvalidParameterError",
    "InsufficientSampleError", "DegenerateError", "DegenerateResponseError", "DegenerateSampleError",
    "DegenerateVarianceError",
    "gini_mean_difference", "sort_by_response", "ddc", "chatterjee_xi", "distance_correlation",
    "hsic", "projection_correlation", "compute",
    "distance_variance_sq", "ddc_variance_estimate", "ddc_asymptotic_pvalue", "chatterjee_asymptotic_pvalue",
    "distance_moments", "reference_sigma_sq", "reference_gini", "reference_moments", "bivariate_normal_ddc",
    "permutation_test", "permutation_pvalue", "independence_test", "power_estimate",
    "generate_example1", "generate_example2", "coefficient_mean_table", "power_curve",
    "standardize", "rank_features", "minimal_model_size", "screening_report", "screening_power_table",
    "screen_dataset", "rank_concordance", "exclusive_discoveries",
    "experiment", "step", "ExperimentWrapper", "Run", "Step", "RunStatus",
    "get_current_run", "RunContext",
    "RunStore", "InMemoryRunStore", "FileRunStore", "configure",
]

configure()
