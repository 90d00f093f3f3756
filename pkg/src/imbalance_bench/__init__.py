"""Benchmarking resampling methods for imbalanced binary classification.

The package measures how random oversampling, random undersampling and
SMOTE — each parameterized by a resampling multiplier m with
IR(resampled) = IR(original) / m — affect cross-validated PR-AUC for three
classifiers (decision tree, k-nearest neighbors, L1 logistic regression),
compares the equalizing and CV-search multiplier strategies, and renders
Dolan-More performance profiles over dataset pools.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .benchmark import (
    DEFAULT_CELLS,
    BenchmarkResult,
    DolanMoreCurve,
    DolanMoreResult,
    QualityMatrix,
    dolan_more,
    emit_curves,
    parse_cell,
    read_results,
    run_benchmark,
)
from .classifiers import (
    Family,
    KnnScorer,
    LogRegScorer,
    ModelSpec,
    TrainedScorer,
    TreeScorer,
    default_grid,
    fit,
    fit_with_params,
    logreg_objective_and_gradient,
    score,
    select_hyperparams,
)
from .datasets import (
    Dataset,
    GaussianPoolConfig,
    PoolEntry,
    from_rows,
    generate_gaussian_pool,
    imbalance_ratio,
    load_csv,
    load_pool,
    save_csv,
    stratified_kfold,
    write_pool,
)
from .errors import (
    ConfigError,
    DataError,
    DimensionMismatch,
    EmptyClass,
    EmptyGrid,
    LabelError,
    MajorityMislabeled,
    MinorityTooSmall,
    MismatchedGrids,
    MultiplierOutOfRange,
    NoComparableRows,
    NoPositives,
    ParseError,
    TooFewElements,
    UsageError,
    WouldEmptyMajority,
)
from .evaluation import (
    DEFAULT_MULTIPLIER_GRID,
    CVReport,
    CvsResult,
    cv_quality,
    eqs_strategy,
    select_multiplier_cvs,
    select_multiplier_eqs,
)
from .metrics import PRCurve, pr_auc, pr_curve
from .resampling import (
    DEFAULT_SMOTE_K,
    Method,
    ResampleResult,
    ResamplingSpec,
    SmoteRecord,
    resample,
    ros,
    rus,
    smote,
)

__all__ = [
    "__version__",
    "BenchmarkResult",
    "CVReport",
    "ConfigError",
    "CvsResult",
    "DEFAULT_CELLS",
    "DEFAULT_MULTIPLIER_GRID",
    "DEFAULT_SMOTE_K",
    "DataError",
    "Dataset",
    "DimensionMismatch",
    "DolanMoreCurve",
    "DolanMoreResult",
    "EmptyClass",
    "EmptyGrid",
    "Family",
    "GaussianPoolConfig",
    "KnnScorer",
    "LabelError",
    "LogRegScorer",
    "MajorityMislabeled",
    "Method",
    "MinorityTooSmall",
    "MismatchedGrids",
    "ModelSpec",
    "MultiplierOutOfRange",
    "NoComparableRows",
    "NoPositives",
    "PRCurve",
    "ParseError",
    "PoolEntry",
    "QualityMatrix",
    "ResampleResult",
    "ResamplingSpec",
    "SmoteRecord",
    "TooFewElements",
    "TrainedScorer",
    "TreeScorer",
    "UsageError",
    "WouldEmptyMajority",
    "cv_quality",
    "default_grid",
    "dolan_more",
    "emit_curves",
    "eqs_strategy",
    "fit",
    "fit_with_params",
    "from_rows",
    "generate_gaussian_pool",
    "imbalance_ratio",
    "load_csv",
    "load_pool",
    "logreg_objective_and_gradient",
    "parse_cell",
    "pr_auc",
    "pr_curve",
    "read_results",
    "resample",
    "ros",
    "run_benchmark",
    "rus",
    "save_csv",
    "score",
    "select_hyperparams",
    "select_multiplier_cvs",
    "select_multiplier_eqs",
    "smote",
    "stratified_kfold",
    "write_pool",
]
