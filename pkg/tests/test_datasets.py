import json

import numpy as np
import pytest

from sstagcn import (
    SyntheticSpec,
    export_embeddings,
    generate_synthetic,
    load_bundle,
    resolve_dataset,
    save_bundle,
)


def write_toy_bundle(tmp_path, nodes=None, edges=None, splits=None):
    nodes_path = tmp_path / "nodes.csv"
    edges_path = tmp_path / "edges.csv"
    splits_path = tmp_path / "splits.json"
    nodes_path.write_text(nodes if nodes is not None else (
        "id,label,f0,f1\n"
        "0,a,1.0,0.0\n"
        "1,b,0.0,1.0\n"
        "2,a,1.0,1.0\n"
    ))
    edges_path.write_text(edges if edges is not None else "src,dst\n0,1\n1,2\n")
    splits_path.write_text(splits if splits is not None else
                           json.dumps({"train": [0], "val": [1], "test": [2]}))
    return nodes_path, edges_path, splits_path


def test_load_toy_bundle(tmp_path):
    bundle = load_bundle(*write_toy_bundle(tmp_path))
    assert bundle.graph.num_nodes == 3
    assert bundle.graph.num_classes == 2
    assert bundle.label_names == ("a", "b")
    np.testing.assert_array_equal(bundle.graph.labels, [0, 1, 0])
    np.testing.assert_array_equal(bundle.splits.train_idx, [0])
    np.testing.assert_array_equal(bundle.splits.test_idx, [2])


def test_single_label_rejected(tmp_path):
    nodes = "id,label,f0\n0,7,1.0\n1,7,2.0\n"
    paths = write_toy_bundle(tmp_path, nodes=nodes,
                             edges="src,dst\n0,1\n",
                             splits=json.dumps({"train": [0], "val": [], "test": [1]}))
    with pytest.raises(ValueError, match="at least 2"):
        load_bundle(*paths)


def test_malformed_row_names_file_and_line(tmp_path):
    nodes = "id,label,f0,f1\n0,a,1.0,0.0\n1,b,oops,1.0\n2,a,0.0,0.0\n"
    paths = write_toy_bundle(tmp_path, nodes=nodes)
    with pytest.raises(ValueError, match=r"nodes\.csv:3"):
        load_bundle(*paths)


def test_edge_with_unknown_node_rejected(tmp_path):
    paths = write_toy_bundle(tmp_path, edges="src,dst\n0,9\n")
    with pytest.raises(ValueError, match="unknown node id 9"):
        load_bundle(*paths)


def test_overlapping_splits_rejected(tmp_path):
    paths = write_toy_bundle(
        tmp_path, splits=json.dumps({"train": [0, 1], "val": [1], "test": [2]})
    )
    with pytest.raises(ValueError, match="overlap"):
        load_bundle(*paths)


def test_duplicate_edges_tolerated(tmp_path):
    paths = write_toy_bundle(tmp_path, edges="src,dst\n0,1\n1,0\n0,1\n")
    bundle = load_bundle(*paths)
    np.testing.assert_array_equal(bundle.graph.edges, [[0, 1]])


def test_save_load_round_trip(tmp_path):
    bundle = generate_synthetic(SyntheticSpec(
        num_clusters=3, nodes_per_cluster=5, feature_dim=3, seed=11,
        intra_edge_prob=0.6, inter_edge_prob=0.1,
    ))
    paths = (tmp_path / "n.csv", tmp_path / "e.csv", tmp_path / "s.json")
    save_bundle(bundle, *paths)
    reloaded = load_bundle(*paths, name=bundle.name)
    assert reloaded == bundle


def test_string_label_round_trip(tmp_path):
    paths = write_toy_bundle(tmp_path)
    bundle = load_bundle(*paths, name="toy")
    out = (tmp_path / "n2.csv", tmp_path / "e2.csv", tmp_path / "s2.json")
    save_bundle(bundle, *out)
    assert load_bundle(*out, name="toy") == bundle


def test_synthetic_deterministic():
    spec = SyntheticSpec(num_clusters=2, nodes_per_cluster=10, seed=3)
    assert generate_synthetic(spec) == generate_synthetic(spec)
    other = SyntheticSpec(num_clusters=2, nodes_per_cluster=10, seed=4)
    assert generate_synthetic(spec) != generate_synthetic(other)


def test_synthetic_noise_free_clusters():
    spec = SyntheticSpec(num_clusters=2, nodes_per_cluster=6, feature_dim=4,
                         feature_noise=0.0, intra_edge_prob=0.5,
                         inter_edge_prob=0.0, seed=0)
    bundle = generate_synthetic(spec)
    g = bundle.graph
    for c in range(2):
        rows = g.features[g.labels == c]
        assert np.all(rows == rows[0])
    assert all(g.labels[i] == g.labels[j] for i, j in g.edges)


def test_synthetic_structure():
    bundle = generate_synthetic(SyntheticSpec())
    g, s = bundle.graph, bundle.splits
    assert g.num_nodes == 200
    assert g.num_classes == 4
    assert s.train_idx.size == 20
    assert s.val_idx.size == 20
    assert s.test_idx.size == 160
    # Stratified: five train nodes per class.
    assert [int((g.labels[s.train_idx] == c).sum()) for c in range(4)] == [5] * 4


def test_synthetic_validation():
    with pytest.raises(ValueError, match="nodes_per_cluster"):
        SyntheticSpec(nodes_per_cluster=1)
    with pytest.raises(ValueError, match="edge probabilities"):
        SyntheticSpec(intra_edge_prob=0.01, inter_edge_prob=0.1)
    with pytest.raises(ValueError, match="feature_noise"):
        SyntheticSpec(feature_noise=-0.5)


def test_export_embeddings_line_counts(tmp_path):
    one = tmp_path / "one.csv"
    export_embeddings(np.array([[0.5]]), one)
    assert one.read_text().count("\n") == 2

    many = tmp_path / "many.csv"
    export_embeddings(np.zeros((7, 3)), many)
    assert many.read_text().count("\n") == 8


def test_export_embeddings_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    M = rng.normal(size=(6, 4))
    path = tmp_path / "emb.csv"
    export_embeddings(M, path)
    parsed = np.loadtxt(path, delimiter=",", skiprows=1)[:, 1:]
    np.testing.assert_allclose(parsed, M, atol=1e-12)


def test_export_embeddings_errors(tmp_path):
    with pytest.raises(ValueError):
        export_embeddings(np.empty((0, 2)), tmp_path / "x.csv")
    with pytest.raises(OSError):
        export_embeddings(np.ones((1, 1)), tmp_path / "missing" / "x.csv")


def test_manifest_resolution(tmp_path):
    bundle = generate_synthetic(SyntheticSpec(num_clusters=2, nodes_per_cluster=4,
                                              intra_edge_prob=0.5, seed=5))
    save_bundle(bundle, tmp_path / "n.csv", tmp_path / "e.csv", tmp_path / "s.json")
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps(
        {"tiny": {"nodes": "n.csv", "edges": "e.csv", "splits": "s.json"}}
    ))
    loaded = resolve_dataset("tiny", manifest)
    assert loaded.name == "tiny"
    assert loaded.graph == bundle.graph
    with pytest.raises(KeyError, match="available"):
        resolve_dataset("nope", manifest)
