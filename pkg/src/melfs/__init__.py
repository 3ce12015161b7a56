"""Wrapper feature selection with a two-subpopulation particle swarm."""
from .classifier import EvalOutcome, cv_accuracy, knn_predict
from .dataset import Dataset, FoldPlan, load_csv, minmax_scale, stratified_kfold
from .mel import MelConfig, RunReport, evaluate, fitness, run_mel, run_pso_baseline
from .swarm import PsoParams
from .weights import FeatureWeights, positive_mass, roulette_sample, selection_probabilities, update_weights

__all__ = [
    "Dataset", "EvalOutcome", "FeatureWeights", "FoldPlan", "MelConfig", "PsoParams", "RunReport",
    "cv_accuracy", "evaluate", "fitness", "knn_predict", "load_csv", "minmax_scale", "positive_mass",
    "roulette_sample", "run_mel", "run_pso_baseline", "selection_probabilities", "stratified_kfold",
    "update_weights",
]

__version__ = "0.1.0"
