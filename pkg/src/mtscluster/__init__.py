"""Clustering of multivariate EMA time series with DTW and global alignment kernels."""

from __future__ import annotations

__version__ = "0.1.0"

from ._backend import BACKEND
from .clustering import (
    ClusterConfig,
    FuzzyPartition,
    HardPartition,
    best_of_restarts,
    fuzzy_cmeans_dtw,
    fuzzy_kmedoids,
    harden,
    hierarchical,
    kernel_kmeans,
    kmeans_dtw,
)
from .data import (
    EmaDataset,
    EmaSeries,
    VariableSchema,
    from_arrays,
    load_csv,
    repair_missing,
    znormalize,
)
from .distance import DistanceMatrix, DtwConfig, distance_matrix, dtw, softdtw
from .errors import DegenerateClusteringError, InputError, MtsClusterError, NumericalError
from .kernel import GakConfig, KernelMatrix, estimate_sigma, gak, kernel_matrix, kernel_to_distance, log_gak
from .validity import (
    QualityReport,
    StabilityReport,
    evaluate,
    instability,
    partition_coefficient,
    partition_entropy,
    silhouette,
    stability_suite,
    xie_beni,
)

__all__ = [
    "BACKEND",
    "ClusterConfig",
    "DegenerateClusteringError",
    "DistanceMatrix",
    "DtwConfig",
    "EmaDataset",
    "EmaSeries",
    "FuzzyPartition",
    "GakConfig",
    "HardPartition",
    "InputError",
    "KernelMatrix",
    "MtsClusterError",
    "NumericalError",
    "QualityReport",
    "StabilityReport",
    "VariableSchema",
    "best_of_restarts",
    "distance_matrix",
    "dtw",
    "estimate_sigma",
    "evaluate",
    "from_arrays",
    "fuzzy_cmeans_dtw",
    "fuzzy_kmedoids",
    "gak",
    "harden",
    "hierarchical",
    "instability",
    "kernel_kmeans",
    "kernel_matrix",
    "kernel_to_distance",
    "kmeans_dtw",
    "load_csv",
    "log_gak",
    "partition_coefficient",
    "partition_entropy",
    "repair_missing",
    "silhouette",
    "softdtw",
    "stability_suite",
    "xie_beni",
    "znormalize",
]
