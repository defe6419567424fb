"""Dense multi-layer graph convolutional network trained by full-batch Adam.

Each layer propagates through the symmetric normalized adjacency:
hidden layers compute ReLU(A_hat @ H @ W), the output layer omits the ReLU,
and softmax lives inside the loss / prediction. Backpropagation is written
out by hand so gradients are exact and checkable against finite differences.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .graph import NormalizedAdjacency
from .validation import check_feature_matrix, check_index_array, check_labels

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class TrainTrace:
    """Per-iteration training loss and accuracies, plus wall-clock seconds."""

    loss: np.ndarray
    train_accuracy: np.ndarray
    val_accuracy: np.ndarray | None
    wall_seconds: float


def glorot_weights(layer_dims, rng):
    """Glorot-uniform initialization, limits +-sqrt(6 / (fan_in + fan_out))."""
    weights = []
    for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
    return weights


def gcn_forward(weights, adj: NormalizedAdjacency, X, return_cache=False,
                dropout_masks=None):
    """Propagate features through all layers; no activation after the last.

    ``dropout_masks`` (one per layer, already scaled) multiply each layer's
    input during training. The cache holds the propagated inputs and
    pre-activations needed for backprop.
    """
    H = np.asarray(X, dtype=float)
    propagated = []
    preacts = []
    L = len(weights)
    for l, W in enumerate(weights):
        if dropout_masks is not None:
            H = H * dropout_masks[l]
        U = adj.dot(H)
        S = U @ W
        propagated.append(U)
        if l < L - 1:
            preacts.append(S)
            H = np.maximum(S, 0.0)
        else:
            logits = S
    if return_cache:
        return logits, (propagated, preacts)
    return logits


def log_softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax(logits):
    return np.exp(log_softmax(logits))


def masked_cross_entropy(logits, labels, idx):
    """Mean negative log-likelihood over the masked rows."""
    ls = log_softmax(logits[idx])
    return float(-ls[np.arange(idx.size), labels[idx]].mean())


def gcn_loss_and_grads(weights, adj, X, labels, train_idx, weight_decay=0.0,
                       decay_scope="all", dropout_masks=None):
    """Masked cross-entropy plus L2 penalty, with exact analytic gradients.

    loss = mean_{i in train_idx} -log softmax(Z)_i[y_i]
           + weight_decay/2 * sum of squared Frobenius norms in scope.

    Returns (loss, grads, logits); logits are reused for accuracy traces.
    """
    if decay_scope not in ("all", "first"):
        raise ValueError(f"decay_scope must be 'all' or 'first', got {decay_scope!r}")
    X = np.asarray(X, dtype=float)
    logits, (propagated, preacts) = gcn_forward(
        weights, adj, X, return_cache=True, dropout_masks=dropout_masks
    )
    L = len(weights)
    m = train_idx.size

    data_loss = masked_cross_entropy(logits, labels, train_idx)
    decayed = range(L) if decay_scope == "all" else (0,)
    reg_loss = 0.5 * weight_decay * sum(
        float((weights[l] ** 2).sum()) for l in decayed
    )
    loss = data_loss + reg_loss

    G = softmax(logits)
    onehot_rows = np.zeros_like(G)
    onehot_rows[train_idx, labels[train_idx]] = 1.0
    mask_rows = np.zeros((logits.shape[0], 1))
    mask_rows[train_idx] = 1.0
    dZ = (G - onehot_rows) * mask_rows / m

    grads = [None] * L
    upstream = dZ
    for l in range(L - 1, -1, -1):
        # propagated[l] already includes this layer's dropout mask.
        grads[l] = propagated[l].T @ upstream
        if weight_decay and (decay_scope == "all" or l == 0):
            grads[l] = grads[l] + weight_decay * weights[l]
        if l > 0:
            dH = adj.dot(upstream @ weights[l].T)
            if dropout_masks is not None:
                dH = dH * dropout_masks[l]
            upstream = dH * (preacts[l - 1] > 0.0)
    return loss, grads, logits


class GCNClassifier(BaseEstimator):
    """Transductive node classifier: L-layer GCN with full-batch Adam.

    Parameters
    ----------
    hidden_dims : tuple of ints
        Hidden layer widths; the network depth is ``len(hidden_dims) + 1``.
    learning_rate, iterations, weight_decay, dropout
        Training hyperparameters; defaults follow the usual two-layer setup
        (lr 0.01, 500 iterations, weight decay 5e-4, no dropout).
    decay_scope : "all" | "first"
        Apply the L2 penalty to every layer or only the input layer.
    early_stop_patience : int | None
        If set and a validation split is given, stop after this many
        iterations without a new best validation accuracy and restore the
        best weights. Off by default.
    seed : int
        Controls initialization and dropout; fixes the entire run.
    """

    def __init__(self, hidden_dims=(16,), learning_rate=0.01, iterations=500,
                 weight_decay=5e-4, dropout=0.0, decay_scope="all",
                 early_stop_patience=None, seed=0):
        self.hidden_dims = hidden_dims
        self.learning_rate = learning_rate
        self.iterations = iterations
        self.weight_decay = weight_decay
        self.dropout = dropout
        self.decay_scope = decay_scope
        self.early_stop_patience = early_stop_patience
        self.seed = seed

    def _validate(self):
        if len(tuple(self.hidden_dims)) < 1:
            raise ValueError("need at least one hidden layer dimension")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")

    def fit(self, X, y, adj, train_idx, val_idx=None, n_classes=None):
        self._validate()
        X = check_feature_matrix(X)
        y = check_labels(y, name="y")
        train_idx = check_index_array(train_idx, X.shape[0], "train_idx")
        if val_idx is not None:
            val_idx = check_index_array(val_idx, X.shape[0], "val_idx", allow_empty=True)
            if val_idx.size == 0:
                val_idx = None
        k = int(y.max()) + 1 if n_classes is None else int(n_classes)
        self.n_classes_ = k
        self.layer_dims_ = (X.shape[1], *tuple(int(h) for h in self.hidden_dims), k)

        rng = np.random.default_rng(self.seed)
        weights = glorot_weights(self.layer_dims_, rng)
        adam_m = [np.zeros_like(W) for W in weights]
        adam_v = [np.zeros_like(W) for W in weights]

        losses = np.zeros(self.iterations)
        train_acc = np.zeros(self.iterations)
        val_acc = np.zeros(self.iterations) if val_idx is not None else None
        best_val, best_weights, since_best = -1.0, None, 0

        t0 = time.perf_counter()
        executed = 0
        for step in range(self.iterations):
            masks = None
            if self.dropout > 0.0:
                keep = 1.0 - self.dropout
                masks = [
                    (rng.random((X.shape[0], dim)) < keep) / keep
                    for dim in self.layer_dims_[:-1]
                ]
            loss, grads, logits = gcn_loss_and_grads(
                weights, adj, X, y, train_idx,
                weight_decay=self.weight_decay, decay_scope=self.decay_scope,
                dropout_masks=masks,
            )
            if not np.isfinite(loss):
                raise RuntimeError(
                    f"non-finite training loss ({loss}) at iteration {step}"
                )
            for l, g in enumerate(grads):
                adam_m[l] = ADAM_BETA1 * adam_m[l] + (1 - ADAM_BETA1) * g
                adam_v[l] = ADAM_BETA2 * adam_v[l] + (1 - ADAM_BETA2) * g * g
                m_hat = adam_m[l] / (1 - ADAM_BETA1 ** (step + 1))
                v_hat = adam_v[l] / (1 - ADAM_BETA2 ** (step + 1))
                weights[l] = weights[l] - self.learning_rate * m_hat / (
                    np.sqrt(v_hat) + ADAM_EPS
                )

            pred = np.argmax(logits, axis=1)
            losses[step] = loss
            train_acc[step] = float((pred[train_idx] == y[train_idx]).mean())
            executed = step + 1
            if val_idx is not None:
                acc = float((pred[val_idx] == y[val_idx]).mean())
                val_acc[step] = acc
                if self.early_stop_patience is not None:
                    if acc > best_val:
                        best_val = acc
                        best_weights = [W.copy() for W in weights]
                        since_best = 0
                    else:
                        since_best += 1
                        if since_best >= self.early_stop_patience:
                            weights = best_weights
                            break

        self.weights_ = weights
        self.trace_ = TrainTrace(
            loss=losses[:executed],
            train_accuracy=train_acc[:executed],
            val_accuracy=val_acc[:executed] if val_acc is not None else None,
            wall_seconds=time.perf_counter() - t0,
        )
        return self

    def predict_logits(self, X, adj):
        return gcn_forward(self.weights_, adj, X)

    def predict_proba(self, X, adj):
        return softmax(self.predict_logits(X, adj))

    def predict(self, X, adj):
        # np.argmax resolves logit ties to the lowest class index.
        return np.argmax(self.predict_logits(X, adj), axis=1)

    def save(self, path):
        """Serialize layer dims, row-major weights, and config to JSON."""
        payload = {
            "layer_dims": list(self.layer_dims_),
            "n_classes": self.n_classes_,
            "weights": [W.ravel().tolist() for W in self.weights_],
            "params": {
                key: (list(val) if isinstance(val, tuple) else val)
                for key, val in self.get_params().items()
            },
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        params = dict(payload["params"])
        if "hidden_dims" in params:
            params["hidden_dims"] = tuple(params["hidden_dims"])
        model = cls(**params)
        dims = payload["layer_dims"]
        model.layer_dims_ = tuple(dims)
        model.n_classes_ = payload["n_classes"]
        model.weights_ = [
            np.array(flat, dtype=float).reshape(dims[l], dims[l + 1])
            for l, flat in enumerate(payload["weights"])
        ]
        return model

    @property
    def depth(self) -> int:
        return len(self.weights_)
