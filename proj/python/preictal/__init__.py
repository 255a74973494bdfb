"""Preictal period optimization engine."""

from ._core import (
    IoError,
    ValidationError,
    auc,
    ciopc,
    ciopr_normalize,
    common_average_reference,
    confusion_metrics,
    design_bandpass,
    evaluate_group,
    extract_features,
    fit_4pl,
    fit_logistic4,
    friedman,
    magnitude_response,
    preprocess,
    read_predictions,
    run_cli,
    select_opp,
    smooth,
)

__all__ = [
    "IoError",
    "ValidationError",
    "auc",
    "ciopc",
    "ciopr_normalize",
    "common_average_reference",
    "confusion_metrics",
    "design_bandpass",
    "evaluate_group",
    "extract_features",
    "fit_4pl",
    "fit_logistic4",
    "friedman",
    "magnitude_response",
    "preprocess",
    "read_predictions",
    "run_cli",
    "select_opp",
    "smooth",
]
