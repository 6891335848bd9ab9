"""Evaluation metrics: NMSE on held-out entries and alphabet projection."""

from __future__ import annotations

import numpy as np

from .errors import MetricError
from .masks import IndexSet, as_matrix, vec_extract
from .regularizer import Alphabet

__all__ = ["nmse", "alphabet_project"]


def nmse(X, O, eval_set: IndexSet) -> float:
    """Normalized mean squared error on the evaluation positions.

    ``||X - O||_F^2 / ||O||_F^2`` with both norms restricted to ``eval_set``.
    Zero exactly when the matrices agree there.
    """
    if len(eval_set) == 0:
        raise MetricError("evaluation set is empty")
    x = vec_extract(X, eval_set)
    o = vec_extract(O, eval_set)
    denom = float(np.sum(o * o))
    if denom == 0.0:
        raise MetricError("reference matrix is zero on the evaluation set")
    d = x - o
    return float(np.sum(d * d) / denom)


def alphabet_project(X, alphabet: Alphabet, positions: IndexSet) -> np.ndarray:
    """Snap the entries at ``positions`` to their nearest letter.

    Ties between two equidistant letters resolve to the smaller one; entries
    outside ``positions`` are returned unchanged.
    """
    X = as_matrix(X, "X")
    positions._check_shape(X)
    out = X.copy()
    vals = out[positions.rows_idx, positions.cols_idx]
    out[positions.rows_idx, positions.cols_idx] = alphabet.nearest(vals)
    return out
