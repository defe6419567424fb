"""Combine base-classifier prediction matrices into one N x K feature matrix.

Three aggregators: element-wise mean, cosine-similarity attention against the
observed train labels, and hard majority voting with seeded random
tie-breaking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import check_index_array

AGGREGATION_METHODS = ("mean", "attention", "voting")


@dataclass(frozen=True)
class AggregatedFeatures:
    """Aggregated N x K matrix plus the method that produced it.

    ``attention_weights`` is populated only for the attention method.
    """

    matrix: np.ndarray
    method: str
    attention_weights: np.ndarray | None = None


def _check_stack(preds):
    if len(preds) == 0:
        raise ValueError("need at least one prediction matrix")
    arrs = [np.asarray(p, dtype=float) for p in preds]
    shape = arrs[0].shape
    for i, a in enumerate(arrs):
        if a.ndim != 2:
            raise ValueError(f"prediction matrix {i} must be 2-D")
        if a.shape != shape:
            raise ValueError(
                f"prediction matrix {i} has shape {a.shape}, expected {shape}"
            )
    return np.stack(arrs)


def aggregate_mean(preds, round_labels=False) -> AggregatedFeatures:
    """Element-wise mean of the k prediction matrices.

    With ``round_labels=True`` the literal label-arithmetic variant is used
    instead: average the argmax labels, round to the nearest class index, and
    one-hot encode. That variant treats class ids as ordinal and is only
    exposed for fidelity experiments.
    """
    stack = _check_stack(preds)
    if round_labels:
        labels = np.argmax(stack, axis=2)
        mean_label = np.rint(labels.mean(axis=0)).astype(int)
        mean_label = np.clip(mean_label, 0, stack.shape[2] - 1)
        matrix = np.zeros(stack.shape[1:])
        matrix[np.arange(stack.shape[1]), mean_label] = 1.0
        return AggregatedFeatures(matrix=matrix, method="mean-label-round")
    return AggregatedFeatures(matrix=stack.mean(axis=0), method="mean")


def _cosine(u, v):
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def _softmax(x):
    shifted = np.exp(x - np.max(x))
    return shifted / shifted.sum()


def aggregate_attention(preds, train_labels_onehot, train_idx) -> AggregatedFeatures:
    """Attention-weighted sum of prediction matrices.

    Each classifier's weight is the softmax of the cosine similarity between
    its train-row predictions and the one-hot train labels, both flattened.
    Only train rows enter the similarity; test labels stay unobserved.
    """
    stack = _check_stack(preds)
    n = stack.shape[1]
    train_idx = check_index_array(train_idx, n, "train_idx")
    Y = np.asarray(train_labels_onehot, dtype=float)
    if Y.shape != (train_idx.size, stack.shape[2]):
        raise ValueError(
            f"train_labels_onehot has shape {Y.shape}, expected "
            f"{(train_idx.size, stack.shape[2])}"
        )
    y_flat = Y.ravel()
    cosines = np.array([_cosine(p[train_idx].ravel(), y_flat) for p in stack])
    weights = _softmax(cosines)
    matrix = np.tensordot(weights, stack, axes=1)
    return AggregatedFeatures(matrix=matrix, method="attention", attention_weights=weights)


def aggregate_voting(preds, seed=0) -> AggregatedFeatures:
    """Hard majority vote per node; plurality ties drawn uniformly at random.

    Each classifier casts its argmax (row ties resolve to the lowest class
    index). The output row is the one-hot of the winning class. Tie draws use
    a generator seeded with ``seed``, so results are deterministic per seed.
    """
    stack = _check_stack(preds)
    k, n, n_classes = stack.shape
    rng = np.random.default_rng(seed)
    votes = np.argmax(stack, axis=2)
    matrix = np.zeros((n, n_classes))
    for i in range(n):
        counts = np.bincount(votes[:, i], minlength=n_classes)
        top = counts.max()
        winners = np.flatnonzero(counts == top)
        choice = winners[0] if winners.size == 1 else rng.choice(winners)
        matrix[i, choice] = 1.0
    return AggregatedFeatures(matrix=matrix, method="voting")


def aggregate(method, preds, *, train_labels_onehot=None, train_idx=None,
              seed=0) -> AggregatedFeatures:
    """Dispatch on the configured aggregation method name.

    Besides the three standard methods, "mean-label-round" selects the
    literal label-arithmetic mean variant (opt-in, fidelity experiments).
    """
    if method == "mean":
        return aggregate_mean(preds)
    if method == "mean-label-round":
        return aggregate_mean(preds, round_labels=True)
    if method == "attention":
        if train_labels_onehot is None or train_idx is None:
            raise ValueError("attention aggregation needs train labels and indices")
        return aggregate_attention(preds, train_labels_onehot, train_idx)
    if method == "voting":
        return aggregate_voting(preds, seed=seed)
    raise ValueError(f"unknown aggregation method {method!r}; choose from {AGGREGATION_METHODS}")
