"""Clustering quality metrics: clustering error under optimal one-one label
reassignment, and normalized mutual information."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DegenerateInputError


def _dense_pair(truth, pred):
    truth = np.asarray(truth).ravel()
    pred = np.asarray(pred).ravel()
    if truth.shape != pred.shape or truth.size == 0:
        raise DegenerateInputError("label arrays must be non-empty and equal-length")
    # Compact both sides to dense ids; every metric here is invariant to
    # relabeling, so this only normalizes the input.
    _, truth = np.unique(truth, return_inverse=True)
    _, pred = np.unique(pred, return_inverse=True)
    return truth, pred


def _confusion(truth: np.ndarray, pred: np.ndarray) -> np.ndarray:
    n_pred = int(pred.max()) + 1
    n_true = int(truth.max()) + 1
    table = np.zeros((n_pred, n_true), dtype=np.int64)
    np.add.at(table, (pred, truth), 1)
    return table


def clustering_error(truth, pred) -> float:
    """Fraction of points misclassified under the best one-one relabeling.

    The predicted label ids are reassigned to true ids by a maximum-weight
    matching on the confusion table, padded to square so the counts differ
    gracefully: when there are more predicted clusters than true ones, the
    unmatched predicted clusters count entirely as errors.
    """
    truth, pred = _dense_pair(truth, pred)
    table = _confusion(truth, pred)
    side = max(table.shape)
    padded = np.zeros((side, side), dtype=np.int64)
    padded[: table.shape[0], : table.shape[1]] = table
    rows, cols = linear_sum_assignment(padded, maximize=True)
    return 1.0 - padded[rows, cols].sum() / truth.size


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(truth, pred) -> float:
    """Normalized mutual information with plug-in entropies (natural log),
    normalized by the mean of the two partition entropies.

    When both partitions are trivial (a single cluster each) the ratio is
    0/0 and is defined as 1: identical partitions deserve full credit.
    """
    truth, pred = _dense_pair(truth, pred)
    table = _confusion(truth, pred).astype(np.float64)
    n = table.sum()
    joint = table / n
    p_pred = joint.sum(axis=1)
    p_true = joint.sum(axis=0)
    denom = 0.5 * (_entropy(p_pred * n) + _entropy(p_true * n))
    if denom == 0.0:
        return 1.0
    outer = np.outer(p_pred, p_true)
    mask = joint > 0
    info = float((joint[mask] * np.log(joint[mask] / outer[mask])).sum())
    return info / denom


def abs_cluster_count_error(l_true: int, l_hat: int) -> int:
    """Absolute error on the estimated number of clusters, |L - L_hat|."""
    return abs(int(l_true) - int(l_hat))
