"""Bagged support-vector regression with randomized kernel choice."""

from .bagging import (
    BaggedSvrModel,
    BootstrapDraw,
    bootstrap_sample,
    member_predictions,
    predict_bagged,
    train_bagged_svr,
)
from .data import ColumnMeta, Dataset, load_csv, write_csv
from .datagen import MODEL_DIMS, SimSpec, generate, tilde, true_surface
from .harness import (
    CsvSource,
    ExperimentConfig,
    MethodSpec,
    ResultsTable,
    SimSource,
    beta_sweep,
    gamma_sweep,
    paper_methods,
    run_repeated_holdout,
    win_proportions,
)
from .kernels import KernelFamily, KernelSpec, default_kernels, eval_kernel, gram_matrix
from .metrics import agreement, error_score, rmse
from .rrm import (
    RrmConfig,
    RrmModel,
    kernel_probabilities,
    load_model,
    member_weights,
    pilot_errors,
    predict_rrm,
    save_model,
    train_rrm,
)
from .svr import ConvergenceError, KktReport, SvrModel, SvrParams, kkt_report, predict_svr, train_svr

__version__ = "0.1.0"

__all__ = [
    "BaggedSvrModel",
    "BootstrapDraw",
    "ColumnMeta",
    "ConvergenceError",
    "CsvSource",
    "Dataset",
    "ExperimentConfig",
    "KernelFamily",
    "KernelSpec",
    "KktReport",
    "MODEL_DIMS",
    "MethodSpec",
    "ResultsTable",
    "RrmConfig",
    "RrmModel",
    "SimSpec",
    "SimSource",
    "SvrModel",
    "SvrParams",
    "agreement",
    "beta_sweep",
    "bootstrap_sample",
    "default_kernels",
    "error_score",
    "eval_kernel",
    "gamma_sweep",
    "generate",
    "gram_matrix",
    "kernel_probabilities",
    "kkt_report",
    "load_csv",
    "load_model",
    "member_predictions",
    "member_weights",
    "paper_methods",
    "pilot_errors",
    "predict_bagged",
    "predict_rrm",
    "predict_svr",
    "rmse",
    "run_repeated_holdout",
    "save_model",
    "tilde",
    "train_bagged_svr",
    "train_rrm",
    "train_svr",
    "true_surface",
    "win_proportions",
    "write_csv",
]
