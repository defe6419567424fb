import math

import numpy as np
import pytest

from sstagcn import (
    BoundInputs,
    GCNClassifier,
    Graph,
    SplitSpec,
    SyntheticSpec,
    bound_from_model,
    check_lemma3,
    evaluate_bound,
    generate_synthetic,
    max_feature_norm,
    neighbor_stats,
    normalize_adjacency,
)
from sstagcn.datasets import DatasetBundle
from sstagcn.gcn import masked_cross_entropy

from conftest import random_graph


def plugin_inputs(**overrides):
    base = dict(
        alpha_loss=1.0, num_classes=1, w0_norm=1.0, w1_norm=1.0,
        feature_norm=1.0, max_neighbors=1, rank_maxima=(1.0,),
        num_labelled=1, num_nodes=2, delta=0.05, empirical_risk=0.0,
    )
    base.update(overrides)
    return BoundInputs(**base)


def test_plugin_case_two_sqrt_two():
    rad, _, _ = evaluate_bound(plugin_inputs())
    assert rad == pytest.approx(2.0 * math.sqrt(2.0), abs=1e-12)


def test_confidence_term_sqrt_two():
    _, conf, _ = evaluate_bound(plugin_inputs(delta=2.0 / math.e**2, num_nodes=2))
    assert conf == pytest.approx(math.sqrt(2.0), abs=1e-12)


def test_homogeneity():
    rad, _, _ = evaluate_bound(plugin_inputs())
    rad2, _, _ = evaluate_bound(plugin_inputs(w0_norm=2.0))
    assert rad2 == pytest.approx(2.0 * rad, abs=1e-12)
    rad4, _, _ = evaluate_bound(plugin_inputs(num_labelled=4))
    assert rad4 == pytest.approx(rad / 2.0, abs=1e-12)


def test_total_includes_empirical_risk():
    rad, conf, total = evaluate_bound(plugin_inputs(empirical_risk=0.25))
    assert total == pytest.approx(0.25 + rad + conf, abs=1e-12)


def test_monotonicity_randomized():
    rng = np.random.default_rng(2)
    for _ in range(25):
        q = int(rng.integers(1, 6))
        base = BoundInputs(
            alpha_loss=float(rng.uniform(0.1, 3)),
            num_classes=int(rng.integers(1, 8)),
            w0_norm=float(rng.uniform(0.1, 5)),
            w1_norm=float(rng.uniform(0.1, 5)),
            feature_norm=float(rng.uniform(0.1, 5)),
            max_neighbors=q,
            rank_maxima=tuple(rng.uniform(0.05, 1, size=q)),
            num_labelled=int(rng.integers(1, 100)),
            num_nodes=int(rng.integers(1, 500)),
            delta=float(rng.uniform(0.01, 0.5)),
            empirical_risk=float(rng.uniform(0, 2)),
        )
        _, _, total = evaluate_bound(base)
        bump = 1.0 + float(rng.uniform(0.05, 0.5))

        def rebuilt(**changes):
            fields = base.to_dict()
            fields["rank_maxima"] = tuple(fields["rank_maxima"])
            fields.update(changes)
            return BoundInputs(**fields)

        # Increasing drivers of the complexity term.
        for name in ("alpha_loss", "w0_norm", "w1_norm", "feature_norm"):
            _, _, up = evaluate_bound(rebuilt(**{name: getattr(base, name) * bump}))
            assert up > total
        _, _, up = evaluate_bound(rebuilt(num_classes=base.num_classes + 1))
        assert up > total
        bigger_m = tuple(v * bump for v in base.rank_maxima)
        _, _, up = evaluate_bound(rebuilt(rank_maxima=bigger_m))
        assert up > total
        # Decreasing in the sample count, node count, and delta.
        _, _, down = evaluate_bound(rebuilt(num_labelled=base.num_labelled * 4))
        assert down < total
        _, _, down = evaluate_bound(rebuilt(num_nodes=base.num_nodes * 4))
        assert down < total
        _, _, down = evaluate_bound(rebuilt(delta=min(0.9, base.delta * 1.5)))
        assert down < total


def test_delta_validation():
    with pytest.raises(ValueError, match="delta"):
        plugin_inputs(delta=0.0)
    with pytest.raises(ValueError, match="delta"):
        plugin_inputs(delta=1.0)


def test_rank_maxima_length_checked():
    with pytest.raises(ValueError, match="rank_maxima"):
        plugin_inputs(rank_maxima=(1.0, 0.5))


def two_node_bundle():
    g = Graph(features=np.array([[1.0, 0.0], [0.0, 1.0]]),
              labels=np.array([0, 1]), num_classes=2,
              edges=np.array([[0, 1]]))
    return DatasetBundle(
        graph=g,
        splits=SplitSpec(train_idx=np.array([0]), val_idx=np.array([], dtype=int),
                         test_idx=np.array([1])),
        name="two-node",
    )


def unit_weight_model(layer_dims):
    model = GCNClassifier(hidden_dims=tuple(layer_dims[1:-1]))
    model.layer_dims_ = tuple(layer_dims)
    model.n_classes_ = layer_dims[-1]
    model.weights_ = [np.ones((a, b)) for a, b in zip(layer_dims[:-1], layer_dims[1:])]
    return model


def test_bound_from_model_zero_weights():
    bundle = two_node_bundle()
    adj = normalize_adjacency(bundle.graph)
    model = unit_weight_model((2, 3, 2))
    model.weights_ = [np.zeros_like(W) for W in model.weights_]
    rep = bound_from_model(model, bundle, adj, delta=0.1)
    assert rep.rademacher_term == 0.0
    assert rep.inputs.w0_norm == 0.0


def test_bound_from_model_matches_hand_evaluation():
    bundle = two_node_bundle()
    adj = normalize_adjacency(bundle.graph)
    model = unit_weight_model((2, 3, 2))
    rep = bound_from_model(model, bundle, adj, alpha_loss=1.0, delta=0.1)

    # Independent plug-in: dense adjacency is all 0.5, so q=2, M=(0.5, 0.5).
    B1 = math.sqrt(6.0)
    B2 = math.sqrt(6.0)
    R = 1.0
    rad = 2.0 * 1.0 * math.sqrt(4.0) * 2 * B1 * B2 * R * 1.0 / math.sqrt(1.0)
    conf = math.sqrt(2.0 * math.log(20.0) / 2.0)
    logits = model.predict_logits(bundle.graph.features, adj)
    risk = masked_cross_entropy(logits, bundle.graph.labels,
                                bundle.splits.train_idx)
    assert rep.inputs.max_neighbors == 2
    assert rep.inputs.rank_maxima == pytest.approx((0.5, 0.5))
    assert rep.rademacher_term == pytest.approx(rad, abs=1e-10)
    assert rep.confidence_term == pytest.approx(conf, abs=1e-12)
    assert rep.total == pytest.approx(risk + rad + conf, abs=1e-10)


def test_bound_rejects_wrong_depth():
    bundle = two_node_bundle()
    adj = normalize_adjacency(bundle.graph)
    model = unit_weight_model((2, 3, 3, 2))
    with pytest.raises(ValueError, match="two-layer"):
        bound_from_model(model, bundle, adj)


def test_bound_exceeds_test_risk_on_trained_models():
    # The bound holds with high probability; check 100 seeded trainings.
    spec = SyntheticSpec(num_clusters=3, nodes_per_cluster=12, feature_dim=4,
                         intra_edge_prob=0.3, inter_edge_prob=0.05,
                         feature_noise=0.5, seed=1)
    bundle = generate_synthetic(spec)
    g, s = bundle.graph, bundle.splits
    adj = normalize_adjacency(g)
    hold = 0
    for seed in range(100):
        model = GCNClassifier(hidden_dims=(8,), iterations=60, seed=seed)
        model.fit(g.features, g.labels, adj, s.train_idx, n_classes=g.num_classes)
        rep = bound_from_model(model, bundle, adj, delta=0.05)
        test_risk = masked_cross_entropy(
            model.predict_logits(g.features, adj), g.labels, s.test_idx
        )
        hold += rep.total > test_risk
    assert hold >= 95


def test_lemma3_single_node_is_one():
    g = Graph(features=np.array([[3.0, 4.0]]), labels=np.array([0]),
              num_classes=2, edges=np.empty((0, 2)))
    assert check_lemma3(g, normalize_adjacency(g)) == pytest.approx(1.0, abs=1e-12)


def test_lemma3_zero_features():
    g = Graph(features=np.zeros((3, 2)), labels=np.array([0, 1, 0]),
              num_classes=2, edges=np.array([[0, 1]]))
    assert check_lemma3(g, normalize_adjacency(g)) == 0.0


def test_lemma3_fuzz_small():
    rng = np.random.default_rng(7)
    for _ in range(50):
        g = random_graph(rng)
        ratio = check_lemma3(g, normalize_adjacency(g))
        assert ratio <= 1.0 + 1e-12


def test_lemma3_consistent_with_neighbor_stats(star_graph):
    adj = normalize_adjacency(star_graph)
    q, _ = neighbor_stats(adj)
    R = max_feature_norm(star_graph)
    sums = adj.dot(star_graph.features)
    brute = ((sums**2).sum(axis=1)).max() / (R * R * q)
    assert check_lemma3(star_graph, adj) == pytest.approx(brute, abs=1e-14)
