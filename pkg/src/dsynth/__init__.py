"""dsynth: privacy-preserving tabular synthesis with a plausible-deniability gate.

A seed-based generative model (dependency DAG + smoothed conditional tables)
produces candidate records from real seeds; only candidates that enough other
records could plausibly have seeded are released.  Both the release test and
the learned model support Laplace-noise privacy budgets.
"""

from .config import ConfigError, RunConfig, load_run_config
from .model import SynthModel, load_model, save_model
from .params import CptSet, count_sensitivity, count_vectors, estimate_cpts, learn_hyperparameter
from .privacy import (
    PrivacyTestReport,
    ReleaseRecord,
    RunStats,
    deterministic_test,
    mechanism_f,
    plausible_seed_count,
    randomized_test,
)
from .schema import (
    AttributeSchema,
    DataError,
    DatasetSplit,
    DiscreteTable,
    RawTable,
    apply_schema,
    discretize,
    infer_schema,
    ingest_csv,
    split,
)
from .structure import (
    ParentSets,
    ScoreReport,
    StructureNoise,
    entropy,
    greedy_parent_search,
    merit_score,
    parent_complexity,
    symmetric_uncertainty,
)
from .synthesis import (
    Candidate,
    SynthesisConfig,
    generate_candidate,
    generate_candidates,
    generation_probability,
    sample_keep_mask,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeSchema",
    "Candidate",
    "ConfigError",
    "CptSet",
    "DataError",
    "DatasetSplit",
    "DiscreteTable",
    "ParentSets",
    "PrivacyTestReport",
    "RawTable",
    "ReleaseRecord",
    "RunConfig",
    "RunStats",
    "ScoreReport",
    "StructureNoise",
    "SynthModel",
    "SynthesisConfig",
    "apply_schema",
    "count_sensitivity",
    "count_vectors",
    "deterministic_test",
    "discretize",
    "entropy",
    "estimate_cpts",
    "generate_candidate",
    "generate_candidates",
    "generation_probability",
    "greedy_parent_search",
    "infer_schema",
    "ingest_csv",
    "learn_hyperparameter",
    "load_model",
    "load_run_config",
    "mechanism_f",
    "merit_score",
    "parent_complexity",
    "plausible_seed_count",
    "randomized_test",
    "sample_keep_mask",
    "save_model",
    "split",
    "symmetric_uncertainty",
]
