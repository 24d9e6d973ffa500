"""Fairness-oriented matrix factorization: models, metrics and experiments.

The library trains rating predictors (dot-product MF, cosine-normalized MF,
a hyperplane-constrained variant, a two-channel paraboloid-surface model,
and random/popularity placements), evaluates them on MAE and on the degree
of Matthew effect (power-law slope gap between recommended and historical
item frequencies), and exports per-epoch curves with delay embeddings.
"""

from .analysis import (
    EpochTrace,
    ExportSummary,
    export_curves,
    export_takens,
    read_curves_csv,
    takens_embed,
)
from .config import ExperimentConfig, SyntheticSpec, read_config_file, validate_config
from .data import (
    Dataset,
    IdMaps,
    Interaction,
    SplitSpec,
    TrainConfig,
    child_seed,
    normalize_rating,
    seeded_rng,
    train_test_split,
)
from .evaluation import EvalContext, epoch_evaluator, final_report, make_eval_context
from .exceptions import (
    ConfigError,
    DegenerateDistributionError,
    DegenerateVectorError,
    DivergenceError,
    EmptyDatasetError,
    ExperimentError,
    InvalidInputError,
    InvalidSplitError,
    ParafairError,
)
from .experiment import load_dataset, run_experiment
from .ingest import ParseStats, SourceFormat, generate_zipf_dataset, parse_ratings_file
from .metrics import (
    FrequencyTable,
    MetricReport,
    UserItemIndex,
    degree_of_matthew_effect,
    fit_powerlaw_slope,
    mae,
    recommendation_frequencies,
)
from .models import (
    FIT_FUNCTIONS,
    MODEL_TAGS,
    FactorSet,
    TrainedModel,
    colinearity_diagnostic,
    cosine_similarity,
    fit_classic_mf,
    fit_cosine_mf,
    fit_linfac,
    fit_paramat,
    fit_random_placement,
    fit_zipf_placement,
    paramat_surface_distance,
    predict,
    predict_pairs,
    project_onto_hyperplane,
    score_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Dataset",
    "DegenerateDistributionError",
    "DegenerateVectorError",
    "DivergenceError",
    "EmptyDatasetError",
    "EpochTrace",
    "EvalContext",
    "ExperimentConfig",
    "ExperimentError",
    "ExportSummary",
    "FIT_FUNCTIONS",
    "FactorSet",
    "FrequencyTable",
    "IdMaps",
    "Interaction",
    "InvalidInputError",
    "InvalidSplitError",
    "MODEL_TAGS",
    "MetricReport",
    "ParafairError",
    "ParseStats",
    "SourceFormat",
    "SplitSpec",
    "SyntheticSpec",
    "TrainConfig",
    "TrainedModel",
    "UserItemIndex",
    "child_seed",
    "colinearity_diagnostic",
    "cosine_similarity",
    "degree_of_matthew_effect",
    "epoch_evaluator",
    "export_curves",
    "export_takens",
    "final_report",
    "fit_classic_mf",
    "fit_cosine_mf",
    "fit_linfac",
    "fit_paramat",
    "fit_powerlaw_slope",
    "fit_random_placement",
    "fit_zipf_placement",
    "generate_zipf_dataset",
    "load_dataset",
    "mae",
    "make_eval_context",
    "normalize_rating",
    "paramat_surface_distance",
    "parse_ratings_file",
    "predict",
    "predict_pairs",
    "project_onto_hyperplane",
    "read_config_file",
    "read_curves_csv",
    "recommendation_frequencies",
    "run_experiment",
    "score_matrix",
    "seeded_rng",
    "takens_embed",
    "train_test_split",
    "validate_config",
]
