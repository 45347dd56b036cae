"""Coverage-guided batch active learning for categorical data."""
from .coverage import (CoverageDensity, InteractionInventory, build_inventory,
                       combinatorial_coverage, coverage_density, enumerate_interactions, sdcc,
                       sdcc_profile)
from .dataset import (Dataset, DatasetError, PoolState, SplitSpec, load_dataset, one_hot_encode,
                      split_pools)
from .harness import (DataSource, ExperimentConfig, ExperimentResult, emit_outputs, read_outputs,
                      run_experiment, summarize)
from .metrics import macro_f1, min_max_normalize, sampling_bias, trapezoid_auc
from .models import FittedModel, ModelSpec, parse_model, predict, predict_proba, train
from .strategies import STRATEGIES, QueryContext, query, score_candidates, select_batch

__version__ = "0.1.0"

__all__ = [
    "CoverageDensity", "InteractionInventory", "build_inventory", "combinatorial_coverage",
    "coverage_density", "enumerate_interactions", "sdcc", "sdcc_profile",
    "Dataset", "DatasetError", "PoolState", "SplitSpec", "load_dataset", "one_hot_encode",
    "split_pools",
    "DataSource", "ExperimentConfig", "ExperimentResult", "emit_outputs", "read_outputs",
    "run_experiment", "summarize",
    "macro_f1", "min_max_normalize", "sampling_bias", "trapezoid_auc",
    "FittedModel", "ModelSpec", "parse_model", "predict", "predict_proba", "train",
    "STRATEGIES", "QueryContext", "query", "score_candidates", "select_batch",
]
