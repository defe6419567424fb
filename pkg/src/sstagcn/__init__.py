"""Stacking-fronted graph convolutional networks for node classification.

Pipeline: classical base classifiers predict class probabilities for every
node, an aggregation step fuses them into a compact feature matrix, and a
graph convolutional network trained on the normalized adjacency produces the
final labels.
"""

from .aggregation import (
    AggregatedFeatures,
    aggregate,
    aggregate_attention,
    aggregate_mean,
    aggregate_voting,
)
from .bounds import BoundInputs, BoundReport, bound_from_model, check_lemma3, evaluate_bound
from .classifiers import (
    CLASSIFIER_REGISTRY,
    DEFAULT_CLASSIFIERS,
    AdaBoostClassifier,
    DecisionTreeClassifier,
    GaussianNBClassifier,
    KNNClassifier,
    RandomForestClassifier,
    make_classifier,
)
from .datasets import (
    DatasetBundle,
    SyntheticSpec,
    export_embeddings,
    generate_synthetic,
    load_bundle,
    resolve_dataset,
    save_bundle,
)
from .gcn import GCNClassifier, TrainTrace, gcn_forward, gcn_loss_and_grads
from .graph import (
    Graph,
    NormalizedAdjacency,
    SplitSpec,
    max_feature_norm,
    neighbor_stats,
    normalize_adjacency,
)
from .metrics import (
    MethodSummary,
    RunResult,
    accuracy,
    bootstrap_ci,
    macro_f1,
    paired_t_test,
    summarize_runs,
)
from .pipeline import SStaGCNClassifier, run_single

__version__ = "0.1.0"

__all__ = [
    "AggregatedFeatures",
    "aggregate",
    "aggregate_attention",
    "aggregate_mean",
    "aggregate_voting",
    "BoundInputs",
    "BoundReport",
    "bound_from_model",
    "check_lemma3",
    "evaluate_bound",
    "CLASSIFIER_REGISTRY",
    "DEFAULT_CLASSIFIERS",
    "AdaBoostClassifier",
    "DecisionTreeClassifier",
    "GaussianNBClassifier",
    "KNNClassifier",
    "RandomForestClassifier",
    "make_classifier",
    "DatasetBundle",
    "SyntheticSpec",
    "export_embeddings",
    "generate_synthetic",
    "load_bundle",
    "resolve_dataset",
    "save_bundle",
    "GCNClassifier",
    "TrainTrace",
    "gcn_forward",
    "gcn_loss_and_grads",
    "Graph",
    "NormalizedAdjacency",
    "SplitSpec",
    "max_feature_norm",
    "neighbor_stats",
    "normalize_adjacency",
    "MethodSummary",
    "RunResult",
    "accuracy",
    "bootstrap_ci",
    "macro_f1",
    "paired_t_test",
    "summarize_runs",
    "SStaGCNClassifier",
    "run_single",
]
