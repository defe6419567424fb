import numpy as np
import pytest
import sklearn.base

from sstagcn import SStaGCNClassifier, accuracy, normalize_adjacency, run_single
from sstagcn.pipeline import fit_base_predictions, one_hot


def test_unknown_method_rejected(synthetic_bundle):
    with pytest.raises(ValueError, match="unknown method"):
        run_single(synthetic_bundle, "gat")


def test_stack_only_is_aggregated_argmax(synthetic_bundle, synthetic_adj):
    art = run_single(synthetic_bundle, "stack-only", adj=synthetic_adj, seed=3)
    assert art.model is None
    np.testing.assert_array_equal(
        art.predictions, np.argmax(art.aggregated.matrix, axis=1)
    )


def test_sstagcn_trains_on_aggregated_matrix(synthetic_bundle, synthetic_adj):
    art = run_single(synthetic_bundle, "sstagcn", adj=synthetic_adj, seed=0,
                     gcn_params={"iterations": 30})
    k = synthetic_bundle.graph.num_classes
    assert art.aggregated.matrix.shape == (200, k)
    assert art.model.layer_dims_[0] == k
    assert art.trace is not None
    assert 0.0 <= art.result.accuracy <= 1.0


def test_gcn_raw_ignores_classifiers(synthetic_bundle, synthetic_adj):
    art = run_single(synthetic_bundle, "gcn-raw", adj=synthetic_adj, seed=0,
                     gcn_params={"iterations": 30})
    assert art.aggregated is None
    assert art.model.layer_dims_[0] == synthetic_bundle.graph.feature_dim


def test_run_single_deterministic(synthetic_bundle, synthetic_adj):
    a = run_single(synthetic_bundle, "sstagcn", adj=synthetic_adj, seed=11,
                   gcn_params={"iterations": 40})
    b = run_single(synthetic_bundle, "sstagcn", adj=synthetic_adj, seed=11,
                   gcn_params={"iterations": 40})
    assert a.result.accuracy == b.result.accuracy
    np.testing.assert_array_equal(a.predictions, b.predictions)


def test_prediction_cache_equivalence(synthetic_bundle, synthetic_adj):
    cache = {}
    a = run_single(synthetic_bundle, "stack-only", adj=synthetic_adj, seed=2,
                   prediction_cache=cache)
    assert cache  # deterministic classifiers were stored
    b = run_single(synthetic_bundle, "stack-only", adj=synthetic_adj, seed=2,
                   prediction_cache=cache)
    np.testing.assert_array_equal(a.predictions, b.predictions)


def test_base_predictions_shapes(synthetic_bundle):
    g = synthetic_bundle.graph
    preds = fit_base_predictions(
        g, synthetic_bundle.splits.train_idx,
        [("knn", {"k": 3}), ("naive_bayes", {})], run_seed=0,
    )
    assert len(preds) == 2
    for p in preds:
        assert p.shape == (g.num_nodes, g.num_classes)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)


def test_plain_gcn_beats_085_on_default_bundle(synthetic_bundle, synthetic_adj):
    # Frozen floor from a reference run (observed 0.956 at the default spec,
    # asserted with the documented -0.05 slack headroom -> 0.85).
    art = run_single(synthetic_bundle, "gcn-raw", adj=synthetic_adj, seed=0)
    assert art.result.accuracy >= 0.85


def test_voting_pipeline_beats_stack_only(synthetic_bundle, synthetic_adj):
    ss = run_single(synthetic_bundle, "sstagcn", adj=synthetic_adj, seed=0)
    so = run_single(synthetic_bundle, "stack-only", adj=synthetic_adj, seed=0)
    assert ss.result.accuracy >= so.result.accuracy


def test_timing_positive(synthetic_bundle, synthetic_adj):
    art = run_single(synthetic_bundle, "stack-only", adj=synthetic_adj, seed=0)
    assert art.result.train_seconds > 0


def test_estimator_fit_predict(synthetic_bundle, synthetic_adj):
    g, s = synthetic_bundle.graph, synthetic_bundle.splits
    est = SStaGCNClassifier(iterations=60, seed=0)
    est.fit(g.features, g.labels, synthetic_adj, s.train_idx,
            n_classes=g.num_classes)
    labels = est.predict()
    assert labels.shape == (g.num_nodes,)
    proba = est.predict_proba(s.test_idx)
    assert proba.shape == (s.test_idx.size, g.num_classes)
    acc = accuracy(labels, g.labels, s.test_idx)
    assert acc >= 0.6
    np.testing.assert_array_equal(est.predict(s.test_idx),
                                  labels[s.test_idx])


def test_estimator_is_sklearn_cloneable():
    est = SStaGCNClassifier(aggregation="mean", iterations=10, seed=4)
    clone = sklearn.base.clone(est)
    assert clone.get_params() == est.get_params()
