"""Inception-score style scoring of class probability matrices."""

from __future__ import annotations

import numpy as np

from ..errors import NumericalError, ShapeError

MARGINAL_EPS = 1e-12
ROW_SUM_TOL = 1e-6


def validate_prob_matrix(probs: np.ndarray) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[1] < 2:
        raise ShapeError(f"expected an n x C probability matrix, got shape {probs.shape}")
    if probs.min() < -1e-12 or probs.max() > 1.0 + 1e-9:
        raise NumericalError("probabilities outside [0, 1]")
    sums = probs.sum(axis=1)
    worst = np.abs(sums - 1.0).max()
    if worst > ROW_SUM_TOL:
        raise NumericalError(f"probability rows must sum to 1 (worst deviation {worst:.2e})")
    return probs


def inception_score(probs: np.ndarray, splits: int = 1) -> tuple[float, float]:
    """exp of the mean KL between per-image conditionals and the marginal.

    Returns (mean, std) across splits; 0*log(0) counts as 0 and the
    marginal is floored at 1e-12 before its log.
    """
    probs = validate_prob_matrix(probs)
    n = probs.shape[0]
    if splits < 1 or n < splits:
        raise NumericalError(f"cannot take {splits} splits of {n} rows")
    scores = []
    for chunk in np.array_split(probs, splits):
        marginal = np.clip(chunk.mean(axis=0), MARGINAL_EPS, None)
        log_ratio = np.where(chunk > 0.0,
                             np.log(np.clip(chunk, MARGINAL_EPS, None)) - np.log(marginal),
                             0.0)
        kl_per_row = (chunk * log_ratio).sum(axis=1)
        scores.append(float(np.exp(kl_per_row.mean())))
    return float(np.mean(scores)), float(np.std(scores))
