"""Generalization-bound evaluation for two-layer models, plus the supporting
neighborhood-sum inequality check.

The bound combines an empirical risk, a Rademacher-complexity term driven by
weight norms and adjacency row statistics, and a confidence term:

    risk <= empirical_risk
            + 2 * alpha * sqrt(2q) * K * B1 * B2 * R * sum(M) / sqrt(m)
            + sqrt(2 * log(2 / delta) / N)

It is reported as a diagnostic; at desk scale it is typically vacuous (> 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gcn import masked_cross_entropy
from .graph import Graph, NormalizedAdjacency, max_feature_norm, neighbor_stats


@dataclass(frozen=True)
class BoundInputs:
    """Everything the bound formula consumes.

    ``rank_maxima`` holds M_1..M_q: per-rank maxima of row-sorted adjacency
    magnitudes; ``num_labelled`` is the training-set size the empirical risk
    was averaged over.
    """

    alpha_loss: float
    num_classes: int
    w0_norm: float
    w1_norm: float
    feature_norm: float
    max_neighbors: int
    rank_maxima: tuple[float, ...]
    num_labelled: int
    num_nodes: int
    delta: float
    empirical_risk: float

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.alpha_loss <= 0:
            raise ValueError("alpha_loss must be positive")
        for name in ("num_classes", "max_neighbors", "num_labelled", "num_nodes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("w0_norm", "w1_norm", "feature_norm", "empirical_risk"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        rank_maxima = tuple(float(v) for v in self.rank_maxima)
        if len(rank_maxima) != self.max_neighbors:
            raise ValueError(
                f"rank_maxima has {len(rank_maxima)} entries, expected "
                f"max_neighbors={self.max_neighbors}"
            )
        if any(v < 0 for v in rank_maxima):
            raise ValueError("rank_maxima entries must be >= 0")
        object.__setattr__(self, "rank_maxima", rank_maxima)

    def to_dict(self) -> dict:
        return {
            "alpha_loss": self.alpha_loss,
            "num_classes": self.num_classes,
            "w0_norm": self.w0_norm,
            "w1_norm": self.w1_norm,
            "feature_norm": self.feature_norm,
            "max_neighbors": self.max_neighbors,
            "rank_maxima": list(self.rank_maxima),
            "num_labelled": self.num_labelled,
            "num_nodes": self.num_nodes,
            "delta": self.delta,
            "empirical_risk": self.empirical_risk,
        }


def evaluate_bound(inp: BoundInputs):
    """Return (rademacher_term, confidence_term, total)."""
    rademacher = (
        2.0
        * inp.alpha_loss
        * math.sqrt(2.0 * inp.max_neighbors)
        * inp.num_classes
        * inp.w0_norm
        * inp.w1_norm
        * inp.feature_norm
        * sum(inp.rank_maxima)
        / math.sqrt(inp.num_labelled)
    )
    confidence = math.sqrt(2.0 * math.log(2.0 / inp.delta) / inp.num_nodes)
    return rademacher, confidence, inp.empirical_risk + rademacher + confidence


@dataclass(frozen=True)
class BoundReport:
    inputs: BoundInputs
    rademacher_term: float
    confidence_term: float
    total: float

    def to_dict(self) -> dict:
        return {
            "inputs": self.inputs.to_dict(),
            "rademacher_term": self.rademacher_term,
            "confidence_term": self.confidence_term,
            "total": self.total,
        }


def bound_from_model(model, bundle, adj: NormalizedAdjacency, alpha_loss=1.0,
                     delta=0.05, features=None) -> BoundReport:
    """Evaluate the bound for a trained two-layer model on a dataset.

    Weight-norm bounds are the trained matrices' Frobenius norms; the
    empirical risk is the masked training cross-entropy. ``features`` defaults
    to the raw node features and should be the aggregated matrix when the
    model was trained on one.

    The theorem covers one-hidden-layer networks only, so any other depth is
    rejected.
    """
    if model.depth != 2:
        raise ValueError(
            f"bound applies to two-layer models only (one hidden layer); "
            f"got depth {model.depth}"
        )
    g = bundle.graph
    X = g.features if features is None else np.asarray(features, dtype=float)
    q, M = neighbor_stats(adj)
    logits = model.predict_logits(X, adj)
    inputs = BoundInputs(
        alpha_loss=alpha_loss,
        num_classes=g.num_classes,
        w0_norm=float(np.linalg.norm(model.weights_[0])),
        w1_norm=float(np.linalg.norm(model.weights_[1])),
        feature_norm=float(np.linalg.norm(X, axis=1).max()),
        max_neighbors=q,
        rank_maxima=tuple(M),
        num_labelled=bundle.splits.num_labelled,
        num_nodes=g.num_nodes,
        delta=delta,
        empirical_risk=masked_cross_entropy(logits, g.labels, bundle.splits.train_idx),
    )
    rademacher, confidence, total = evaluate_bound(inputs)
    return BoundReport(
        inputs=inputs,
        rademacher_term=rademacher,
        confidence_term=confidence,
        total=total,
    )


def check_lemma3(g: Graph, adj: NormalizedAdjacency) -> float:
    """Max over nodes of ||row-weighted neighbor feature sum||^2 / (R^2 q).

    The inequality asserts this ratio never exceeds 1. A graph with all-zero
    features returns 0 by convention.
    """
    R = max_feature_norm(g)
    if R == 0.0:
        return 0.0
    q, _ = neighbor_stats(adj)
    sums = adj.dot(g.features)
    norms_sq = (sums**2).sum(axis=1)
    return float(norms_sq.max() / (R * R * q))
