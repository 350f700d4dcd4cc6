"""Affordance Bayesian networks learned from noisy continuous sensors.

The package covers the full pipeline: discrete network representation
and exact inference, Gaussian sensor models with soft and hard (MAP)
assignment, EM parameter learning over the hidden discrete layer, the
hard-discretization baseline it is benchmarked against, K2 structure
search, and a seeded simulation benchmark with a CLI.
"""

from .baseline import count_bayes, count_mle, discretize, one_hot_posteriors
from .bench import (
    ExperimentConfig,
    TrialResult,
    make_complex_network,
    make_simple_network,
    rms_error,
    run_suite,
    summarize,
    synthesize_dataset,
)
from .data import Dataset, DiscretizedDataset
from .em import (
    EmConfig,
    EmTrace,
    FamilyPosterior,
    e_step,
    m_step,
    observed_loglik,
    run_em,
)
from .errors import (
    AffbnError,
    AllZeroLikelihood,
    ConfigError,
    CycleDetected,
    EvidenceShapeMismatch,
    InitializationError,
    NotNormalized,
    ShapeMismatch,
    SpecMismatch,
    UnknownNode,
)
from .inference import family_marginals, marginal, node_marginals, query
from .network import (
    Cpt,
    Network,
    NetworkSpec,
    ancestral_sample,
    joint_log_prob,
    sample_assignments,
    validate,
)
from .sensors import (
    SensorModel,
    evenly_spaced_sensors,
    map_assign,
    responsibilities,
    shared_sigma_model,
)
from .serialize import load_model, save_model
from .structure import family_score, k2_search

__version__ = "0.1.0"

__all__ = [
    "AffbnError",
    "AllZeroLikelihood",
    "ConfigError",
    "Cpt",
    "CycleDetected",
    "Dataset",
    "DiscretizedDataset",
    "EmConfig",
    "EmTrace",
    "EvidenceShapeMismatch",
    "ExperimentConfig",
    "FamilyPosterior",
    "InitializationError",
    "Network",
    "NetworkSpec",
    "NotNormalized",
    "SensorModel",
    "ShapeMismatch",
    "SpecMismatch",
    "TrialResult",
    "UnknownNode",
    "ancestral_sample",
    "count_bayes",
    "count_mle",
    "discretize",
    "e_step",
    "evenly_spaced_sensors",
    "family_marginals",
    "family_score",
    "joint_log_prob",
    "k2_search",
    "load_model",
    "m_step",
    "make_complex_network",
    "make_simple_network",
    "map_assign",
    "marginal",
    "node_marginals",
    "observed_loglik",
    "one_hot_posteriors",
    "query",
    "responsibilities",
    "rms_error",
    "run_em",
    "run_suite",
    "sample_assignments",
    "save_model",
    "shared_sigma_model",
    "summarize",
    "synthesize_dataset",
    "validate",
]
