"""Diverse and relevant feature selection with sample distance covariance.

The package enumerates every inclusion-minimal maximizer of a quasi-concave
diversity objective built from pairwise distance covariances, runs
all-relevant forward selection against a response, and composes the two.
A brute-force power-set oracle is included for exact checks at small scale.
"""

from .dcov_core import (
    DataError,
    DataMatrix,
    DCovConfig,
    augment_union,
    distance_matrix,
    double_center,
    fast_dcov2_univariate,
    sample_dcor2,
    sample_dcov2,
    standardize,
)
from .diverse import (
    MinimalMaximizerResult,
    PiCluster,
    PiSeries,
    build_pi_series,
    diversity_ordering,
    extract_pi_cluster,
    minimal_maximizers,
)
from .linkage import PairwiseDCovCache, build_cache, m_pi, pi_linkage
from .oracle import (
    EnumerationResult,
    ScalingExperimentResult,
    SizeGuardError,
    enumerate_m_pi,
    power_set_dependence_experiment,
    union_decomposition_check,
)
from .pipeline import PipelineConfig, StageEmptyError, controlled_select, two_stage
from .relevant import RelevanceRanking, RelevantSet, kww_select, marginal_ranking
from .report import SelectionReport, Stage

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "DataMatrix",
    "DCovConfig",
    "EnumerationResult",
    "MinimalMaximizerResult",
    "PairwiseDCovCache",
    "PiCluster",
    "PiSeries",
    "PipelineConfig",
    "RelevanceRanking",
    "RelevantSet",
    "ScalingExperimentResult",
    "SelectionReport",
    "SizeGuardError",
    "Stage",
    "StageEmptyError",
    "augment_union",
    "build_cache",
    "build_pi_series",
    "controlled_select",
    "distance_matrix",
    "diversity_ordering",
    "double_center",
    "enumerate_m_pi",
    "extract_pi_cluster",
    "fast_dcov2_univariate",
    "kww_select",
    "m_pi",
    "marginal_ranking",
    "minimal_maximizers",
    "pi_linkage",
    "power_set_dependence_experiment",
    "sample_dcor2",
    "sample_dcov2",
    "standardize",
    "two_stage",
    "union_decomposition_check",
]
