"""Multiway sparse distance weighted discrimination.

Binary classification of K-way tensor predictors with a low-rank CP
coefficient tensor, elastic-net style sparsity on the factor weights, MM
coordinate-descent fitting, cross-validated tuning, bootstrap intervals,
and a simulation study harness.
"""

__version__ = "0.1.0"

from .bootstrap import BootstrapConfig, BootstrapResult, align_to_reference, bootstrap_ci
from .data import Dataset, Standardizer
from .errors import DataError, DimensionError, NumericalError
from .model import Classifier, make_classifier, normalize_factors, predict, score
from .objective import (COUPLED, SEPARABLE_L2, TENSOR, PenaltySpec, dwd_loss,
                        dwd_loss_deriv, objective, penalty)
from .simulate import (Metrics, MethodSpec, SimDesign, StudyRow, builtin_method,
                       eval_metrics, gen_dataset, run_study)
from .solver import FitConfig, FitResult, effective_rank, fit, soft_threshold
from .tensor import assemble, gram_hadamard, inner, matricize, norm, project_out
from .tuning import CVConfig, CVResult, select_lambdas, stratified_kfold, welch_t

__all__ = [
    "__version__",
    "BootstrapConfig", "BootstrapResult", "align_to_reference", "bootstrap_ci",
    "Dataset", "Standardizer",
    "DataError", "DimensionError", "NumericalError",
    "Classifier", "make_classifier", "normalize_factors", "predict", "score",
    "COUPLED", "SEPARABLE_L2", "TENSOR", "PenaltySpec",
    "dwd_loss", "dwd_loss_deriv", "objective", "penalty",
    "Metrics", "MethodSpec", "SimDesign", "StudyRow", "builtin_method",
    "eval_metrics", "gen_dataset", "run_study",
    "FitConfig", "FitResult", "effective_rank", "fit", "soft_threshold",
    "assemble", "gram_hadamard", "inner", "matricize", "norm", "project_out",
    "CVConfig", "CVResult", "select_lambdas", "stratified_kfold", "welch_t",
]
