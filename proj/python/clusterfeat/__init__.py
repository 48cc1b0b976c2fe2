"""Two-layer feature learning on latent cluster structure.

Thin Python surface over the C++ core: data sampling, Fourier utilities,
covariance-clustering baselines, and the joint/layerwise trainers.
"""

from ._core import (
    BooleanFunction,
    DataModel,
    bsc_edge_threshold,
    bsc_model,
    bsc_sample_budget,
    covariance_threshold_cluster,
    empirical_covariance,
    gaussian_mixture_model,
    hermite_coeff_variance,
    joint_train,
    layerwise_train,
    majority_coefficient,
    majority_margin,
    named_target,
    partition_error,
    population_covariance,
    sample,
    samples_to_threshold,
    selfcheck,
    signal_stats,
    spectral_cluster,
    walsh_hadamard,
)

__all__ = [
    "BooleanFunction",
    "DataModel",
    "bsc_edge_threshold",
    "bsc_model",
    "bsc_sample_budget",
    "covariance_threshold_cluster",
    "empirical_covariance",
    "gaussian_mixture_model",
    "hermite_coeff_variance",
    "joint_train",
    "layerwise_train",
    "majority_coefficient",
    "majority_margin",
    "named_target",
    "partition_error",
    "population_covariance",
    "sample",
    "samples_to_threshold",
    "selfcheck",
    "signal_stats",
    "spectral_cluster",
    "walsh_hadamard",
]
