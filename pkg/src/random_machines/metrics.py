"""Prediction-quality and ensemble-diversity metrics."""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np


def rmse(y: np.ndarray, yhat: np.ndarray) -> float:
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape or y.ndim != 1:
        raise ValueError(f"y and yhat must be equal-length vectors, got {y.shape} and {yhat.shape}")
    if y.size == 0:
        raise ValueError("rmse of empty vectors is undefined")
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


class ErrorScore(NamedTuple):
    """Min-max normalized errors: best method maps to 0, worst to 1.

    ``degenerate`` is set when every input error is identical, in which case
    all scores are 0 (no method is worse than the best).
    """

    values: np.ndarray
    degenerate: bool


def error_score(errors: np.ndarray) -> ErrorScore:
    e = np.asarray(errors, dtype=np.float64)
    if e.ndim != 1 or e.size < 2:
        raise ValueError(f"need at least 2 error values, got shape {e.shape}")
    if not np.all(np.isfinite(e)):
        raise ValueError("errors must be finite")
    lo = e.min()
    span = e.max() - lo
    if span == 0.0:
        return ErrorScore(np.zeros_like(e), True)
    return ErrorScore((e - lo) / span, False)


def agreement(preds: np.ndarray) -> float:
    """Mean pairwise Pearson correlation of prediction rows.

    ``preds`` holds one row per model and one column per test observation;
    the mean runs over the strict upper triangle of the correlation matrix.
    Pairs involving a constant row (correlation undefined) are skipped with a
    warning; if no pair survives, raises ValueError.
    """
    P = np.asarray(preds, dtype=np.float64)
    if P.ndim != 2:
        raise ValueError("preds must be a 2-D matrix of shape (models, observations)")
    B, T = P.shape
    if B < 2 or T < 2:
        raise ValueError(f"need at least 2 rows and 2 columns, got {P.shape}")
    centered = P - P.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.einsum("ij,ij->i", centered, centered))
    valid = np.ptp(P, axis=1) > 0.0

    n_valid = int(valid.sum())
    total_pairs = B * (B - 1) // 2
    valid_pairs = n_valid * (n_valid - 1) // 2
    if valid_pairs == 0:
        raise ValueError("agreement undefined: every pair involves a constant prediction row")
    if valid_pairs < total_pairs:
        warnings.warn(
            f"agreement: skipped {total_pairs - valid_pairs} of {total_pairs} pairs "
            "involving constant prediction rows",
            stacklevel=2,
        )

    Cv = centered[valid]
    nv = norms[valid]
    corr = (Cv @ Cv.T) / np.outer(nv, nv)
    iu = np.triu_indices(n_valid, k=1)
    return float(corr[iu].mean())
