"""Empirical cross-over function toolkit.

Data side: sort a sample once, evaluate the cross-over function at a level
or over every bucket, and cut the sample into two clusters at the first
nonpositive bucket.  Theory side: the same quantities for parametric
models, the limit variance and covariance of the scaled estimation error,
and seeded Monte Carlo experiments that compare the two.
"""

from .asymptotics import (
    CovSpec,
    InfluenceDecomposition,
    asymptotic_cov,
    asymptotic_variance,
    covariance_grid,
    influence,
    newton_split_estimate,
    plugin_variance,
)
from .dataio import read_values
from .empirical import (
    EcfCurve,
    SortedSample,
    TwoClusterSplit,
    bucket_index,
    ecf_curve,
    ecf_eval,
    empirical_split_point,
    two_cluster_split,
)
from .errors import (
    BandwidthError,
    DataFormatError,
    DegenerateDerivativeError,
    DensityEstimateError,
    DomainError,
    EcfError,
    NoCrossingError,
    NumericalError,
    QuadratureError,
    SingularityError,
)
from .models import (
    Distribution,
    Exponential,
    Normal,
    QuantileModel,
    SplitDiagnostics,
    Uniform,
    find_split_point,
    parse_model,
)
from .rng import substream, uniforms_open
from .simulate import (
    EXPERIMENTS,
    CovGridResult,
    SimConfig,
    SimReport,
    kolmogorov_pvalue,
    ks_test,
    run_experiment,
    sample_iid,
    simulate_cov_grid,
    simulate_tn,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BandwidthError",
    "CovGridResult",
    "CovSpec",
    "DataFormatError",
    "DegenerateDerivativeError",
    "DensityEstimateError",
    "Distribution",
    "DomainError",
    "EcfCurve",
    "EcfError",
    "EXPERIMENTS",
    "Exponential",
    "InfluenceDecomposition",
    "NoCrossingError",
    "Normal",
    "NumericalError",
    "QuadratureError",
    "QuantileModel",
    "SimConfig",
    "SimReport",
    "SingularityError",
    "SortedSample",
    "SplitDiagnostics",
    "TwoClusterSplit",
    "Uniform",
    "asymptotic_cov",
    "asymptotic_variance",
    "bucket_index",
    "covariance_grid",
    "ecf_curve",
    "ecf_eval",
    "empirical_split_point",
    "find_split_point",
    "influence",
    "kolmogorov_pvalue",
    "ks_test",
    "newton_split_estimate",
    "parse_model",
    "plugin_variance",
    "read_values",
    "run_experiment",
    "sample_iid",
    "simulate_cov_grid",
    "simulate_tn",
    "substream",
    "two_cluster_split",
    "uniforms_open",
]
