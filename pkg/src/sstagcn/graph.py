"""Graph container, symmetric adjacency normalization, and split bookkeeping.

The normalized operator used everywhere is the self-loop-augmented symmetric
normalization  D^{-1/2} (A + I) D^{-1/2}, stored sparse with an optional dense
materialization for small graphs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .validation import check_feature_matrix, check_labels

# All bundled experiment graphs fit densely below this; larger graphs stay sparse.
DENSE_CAP_DEFAULT = 20_000


def canonicalize_edges(edges, num_nodes: int) -> np.ndarray:
    """Return undirected edges as unique sorted (i, j) pairs with i < j.

    Duplicate edges are collapsed and explicit self-loops dropped; the
    normalization step re-adds exactly one self-loop per node.
    """
    edges = np.asarray(edges, dtype=int)
    if edges.size == 0:
        return np.empty((0, 2), dtype=int)
    if edges.ndim != 2 or edges.shape[1] != 2:
        raise ValueError(f"edges must have shape (E, 2), got {edges.shape}")
    if edges.min() < 0 or edges.max() >= num_nodes:
        raise ValueError(
            f"edge endpoint outside [0, {num_nodes}): offending value "
            f"{edges.min() if edges.min() < 0 else edges.max()}"
        )
    lo = edges.min(axis=1)
    hi = edges.max(axis=1)
    keep = lo != hi
    canon = np.unique(np.stack([lo[keep], hi[keep]], axis=1), axis=0)
    return canon.reshape(-1, 2)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph with node features and class labels.

    Attributes
    ----------
    features : (N, d) float array
    labels : (N,) int array with values in [0, num_classes)
    num_classes : int, at least 2
    edges : (E, 2) int array, canonicalized on construction
    """

    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    edges: np.ndarray

    def __post_init__(self):
        features = check_feature_matrix(self.features, "features")
        labels = check_labels(self.labels, name="labels")
        if labels.shape[0] != features.shape[0]:
            raise ValueError(
                f"got {labels.shape[0]} labels for {features.shape[0]} nodes"
            )
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {self.num_classes}")
        if labels.max() >= self.num_classes:
            raise ValueError(
                f"label {labels.max()} out of range for {self.num_classes} classes"
            )
        edges = canonicalize_edges(self.edges, features.shape[0])
        for name, value in (
            ("features", features),
            ("labels", labels),
            ("edges", edges),
        ):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def num_nodes(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.num_classes == other.num_classes
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.edges, other.edges)
        )


@dataclass(frozen=True, eq=False)
class SplitSpec:
    """Disjoint train/val/test node index sets; train must be non-empty."""

    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("train_idx", "val_idx", "test_idx"):
            idx = np.asarray(getattr(self, name), dtype=int)
            if idx.ndim != 1:
                raise ValueError(f"{name} must be 1-D")
            if idx.size and idx.min() < 0:
                raise ValueError(f"{name} contains negative indices")
            if np.unique(idx).size != idx.size:
                raise ValueError(f"{name} contains duplicate indices")
            arrays[name] = idx
        if arrays["train_idx"].size == 0:
            raise ValueError("train_idx must not be empty")
        combined = np.concatenate(list(arrays.values()))
        if np.unique(combined).size != combined.size:
            raise ValueError("train/val/test splits overlap")
        for name, value in arrays.items():
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    def validate_for(self, num_nodes: int) -> None:
        for name, idx in (
            ("train_idx", self.train_idx),
            ("val_idx", self.val_idx),
            ("test_idx", self.test_idx),
        ):
            if idx.size and idx.max() >= num_nodes:
                raise ValueError(f"{name} references node {idx.max()} >= N={num_nodes}")

    @property
    def num_labelled(self) -> int:
        """Size of the observed-label training set."""
        return int(self.train_idx.size)

    def __eq__(self, other):
        if not isinstance(other, SplitSpec):
            return NotImplemented
        return (
            np.array_equal(self.train_idx, other.train_idx)
            and np.array_equal(self.val_idx, other.val_idx)
            and np.array_equal(self.test_idx, other.test_idx)
        )


@dataclass(frozen=True)
class NormalizedAdjacency:
    """Symmetric normalized adjacency with self-loops, stored row-indexed sparse.

    Invariants: symmetric, strictly positive diagonal, spectral norm <= 1.
    """

    matrix: sp.csr_matrix
    dense_cap: int = DENSE_CAP_DEFAULT

    @property
    def num_nodes(self) -> int:
        return self.matrix.shape[0]

    def row(self, i: int):
        """Nonzero (column indices, values) of row i."""
        start, stop = self.matrix.indptr[i], self.matrix.indptr[i + 1]
        return self.matrix.indices[start:stop], self.matrix.data[start:stop]

    def dot(self, X: np.ndarray) -> np.ndarray:
        return self.matrix @ X

    def dense(self) -> np.ndarray:
        if self.num_nodes > self.dense_cap:
            raise ValueError(
                f"dense materialization refused: N={self.num_nodes} exceeds "
                f"cap {self.dense_cap}"
            )
        return self.matrix.toarray()


def normalize_adjacency(g: Graph, dense_cap: int = DENSE_CAP_DEFAULT) -> NormalizedAdjacency:
    """Build D^{-1/2} (A + I) D^{-1/2} for an undirected graph.

    Every node gets a self-loop, so isolated nodes normalize cleanly
    (their diagonal entry is 1). Zero entries stay exactly zero.
    """
    n = g.num_nodes
    e = g.edges
    rows = np.concatenate([e[:, 0], e[:, 1], np.arange(n)])
    cols = np.concatenate([e[:, 1], e[:, 0], np.arange(n)])
    data = np.ones(rows.shape[0])
    a_tilde = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    degrees = np.asarray(a_tilde.sum(axis=1)).ravel()
    d_inv_sqrt = 1.0 / np.sqrt(degrees)
    # Scale each stored entry by 1/sqrt(deg_i * deg_j); structure is untouched.
    a_hat = a_tilde.tocoo()
    a_hat.data = a_hat.data * d_inv_sqrt[a_hat.row] * d_inv_sqrt[a_hat.col]
    return NormalizedAdjacency(matrix=a_hat.tocsr(), dense_cap=dense_cap)


def neighbor_stats(adj: NormalizedAdjacency):
    """Max per-row support q and per-rank magnitude maxima M_1..M_q.

    q counts the self-loop (the diagonal is part of the normalized operator's
    row support). M_s is the maximum over rows of the s-th largest magnitude
    among that row's nonzeros; rows with fewer than s nonzeros contribute 0.
    """
    n = adj.num_nodes
    counts = np.diff(adj.matrix.indptr)
    q = int(counts.max())
    M = np.zeros(q)
    for i in range(n):
        _, vals = adj.row(i)
        mags = np.sort(np.abs(vals))[::-1]
        M[: mags.size] = np.maximum(M[: mags.size], mags)
    return q, M


def max_feature_norm(g: Graph) -> float:
    """Tightest R with ||x_i||_2 <= R over all node feature rows."""
    return float(np.linalg.norm(g.features, axis=1).max())
