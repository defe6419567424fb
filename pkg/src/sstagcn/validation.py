"""Input validation helpers shared across estimators and pipeline stages."""

from __future__ import annotations

import numpy as np


def check_feature_matrix(X, name="X") -> np.ndarray:
    """Coerce to a 2-D float array, rejecting empty or non-finite input."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {X.shape}")
    if X.shape[0] == 0:
        raise ValueError(f"{name} has no rows")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def check_labels(y, n_classes=None, name="y") -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {y.shape}")
    if y.shape[0] == 0:
        raise ValueError(f"{name} is empty")
    if not np.issubdtype(y.dtype, np.integer):
        y_int = y.astype(int)
        if not np.array_equal(y_int, y):
            raise ValueError(f"{name} must hold integer class indices")
        y = y_int
    if y.min() < 0:
        raise ValueError(f"{name} contains negative class indices")
    if n_classes is not None and y.max() >= n_classes:
        raise ValueError(
            f"{name} contains class {y.max()} but only {n_classes} classes declared"
        )
    return y


def check_index_array(idx, n, name="idx", allow_empty=False) -> np.ndarray:
    """Validate an array of node indices into [0, n)."""
    idx = np.asarray(idx, dtype=int)
    if idx.ndim != 1:
        raise ValueError(f"{name} must be 1-D")
    if not allow_empty and idx.size == 0:
        raise ValueError(f"{name} must not be empty")
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ValueError(f"{name} has entries outside [0, {n})")
    if np.unique(idx).size != idx.size:
        raise ValueError(f"{name} contains duplicate indices")
    return idx


def check_probability_rows(P, name="probabilities", tol=1e-9) -> np.ndarray:
    """Assert each row is a probability vector: nonnegative, sums to 1 within tol."""
    P = np.asarray(P, dtype=float)
    if P.ndim != 2:
        raise ValueError(f"{name} must be 2-D")
    if P.min() < -tol:
        raise ValueError(f"{name} has negative entries (min {P.min()})")
    sums = P.sum(axis=1)
    bad = np.abs(sums - 1.0) > tol
    if bad.any():
        i = int(np.argmax(bad))
        raise ValueError(f"{name} row {i} sums to {sums[i]}, expected 1 +- {tol}")
    return P
