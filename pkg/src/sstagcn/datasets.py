"""Dataset loading, saving, and synthetic cluster-graph generation.

Bundle format (plain text, one dataset = three files):

* ``nodes.csv``  -- header ``id,label,f0,...,f{d-1}``; real-valued features.
* ``edges.csv``  -- header ``src,dst``; one undirected edge per row,
  duplicates tolerated.
* ``splits.json`` -- object with arrays ``train``, ``val``, ``test`` of node ids.

Named datasets resolve through a JSON manifest mapping name -> the three paths.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph, SplitSpec


@dataclass(frozen=True, eq=False)
class DatasetBundle:
    """A graph plus its train/val/test split and a name.

    ``label_names`` records the original label of each dense class index,
    so heterogeneous string labels survive a save/load round trip.
    """

    graph: Graph
    splits: SplitSpec
    name: str
    label_names: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.name:
            raise ValueError("bundle name must be non-empty")
        self.splits.validate_for(self.graph.num_nodes)
        if not self.label_names:
            object.__setattr__(
                self,
                "label_names",
                tuple(str(k) for k in range(self.graph.num_classes)),
            )
        elif len(self.label_names) != self.graph.num_classes:
            raise ValueError("label_names length must equal num_classes")

    def __eq__(self, other):
        if not isinstance(other, DatasetBundle):
            return NotImplemented
        return (
            self.name == other.name
            and self.label_names == other.label_names
            and self.graph == other.graph
            and self.splits == other.splits
        )


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters for the labeled cluster-graph generator."""

    num_clusters: int = 4
    nodes_per_cluster: int = 50
    feature_dim: int = 8
    intra_edge_prob: float = 0.1
    inter_edge_prob: float = 0.01
    feature_noise: float = 0.5
    seed: int = 0
    train_fraction: float = 0.1
    val_fraction: float = 0.1

    def __post_init__(self):
        if self.num_clusters < 2:
            raise ValueError("num_clusters must be >= 2")
        if self.nodes_per_cluster < 2:
            raise ValueError("nodes_per_cluster must be >= 2")
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be >= 1")
        if not 0.0 <= self.inter_edge_prob < self.intra_edge_prob <= 1.0:
            raise ValueError(
                "edge probabilities must satisfy 0 <= inter < intra <= 1, got "
                f"inter={self.inter_edge_prob}, intra={self.intra_edge_prob}"
            )
        if self.feature_noise < 0:
            raise ValueError("feature_noise must be >= 0")
        if not (0 < self.train_fraction and 0 <= self.val_fraction
                and self.train_fraction + self.val_fraction < 1):
            raise ValueError("train/val fractions must leave room for a test set")


def _parse_error(path, line_no, msg):
    return ValueError(f"{path}:{line_no}: {msg}")


def _label_order(raw_labels):
    """Dense-id order for raw label strings: numeric when possible, else lexicographic."""
    unique = sorted(set(raw_labels))
    try:
        return sorted(unique, key=float)
    except ValueError:
        return unique


def load_bundle(nodes_path, edges_path, splits_path, name=None) -> DatasetBundle:
    """Load a dataset bundle from its three files.

    Labels are remapped to a dense [0, K) range; the original labels are kept
    in ``label_names``. Malformed rows raise errors naming the file and line.
    """
    nodes_path, edges_path, splits_path = (
        Path(nodes_path), Path(edges_path), Path(splits_path),
    )

    ids, raw_labels, feature_rows = [], [], []
    with open(nodes_path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        cols = header.split(",")
        if cols[:2] != ["id", "label"]:
            raise _parse_error(nodes_path, 1, f"expected header 'id,label,f0,...', got {header!r}")
        d = len(cols) - 2
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != d + 2:
                raise _parse_error(
                    nodes_path, line_no,
                    f"expected {d + 2} fields, got {len(fields)}",
                )
            try:
                ids.append(int(fields[0]))
            except ValueError:
                raise _parse_error(nodes_path, line_no, f"bad node id {fields[0]!r}") from None
            raw_labels.append(fields[1])
            try:
                feature_rows.append(np.array(fields[2:], dtype=float))
            except ValueError:
                raise _parse_error(nodes_path, line_no, "non-numeric feature value") from None

    if not ids:
        raise _parse_error(nodes_path, 2, "no node rows")
    if len(set(ids)) != len(ids):
        raise ValueError(f"{nodes_path}: duplicate node ids")
    id_to_index = {node_id: i for i, node_id in enumerate(ids)}

    order = _label_order(raw_labels)
    if len(order) < 2:
        raise ValueError(
            f"{nodes_path}: found {len(order)} distinct label(s); need at least 2 classes"
        )
    label_to_class = {lab: k for k, lab in enumerate(order)}
    labels = np.array([label_to_class[lab] for lab in raw_labels], dtype=int)
    features = np.vstack(feature_rows)

    edge_list = []
    with open(edges_path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header.split(",")[:2] != ["src", "dst"]:
            raise _parse_error(edges_path, 1, f"expected header 'src,dst', got {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 2:
                raise _parse_error(edges_path, line_no, f"expected 2 fields, got {len(fields)}")
            try:
                src, dst = int(fields[0]), int(fields[1])
            except ValueError:
                raise _parse_error(edges_path, line_no, f"bad edge endpoints {line!r}") from None
            for endpoint in (src, dst):
                if endpoint not in id_to_index:
                    raise _parse_error(
                        edges_path, line_no, f"edge references unknown node id {endpoint}"
                    )
            edge_list.append((id_to_index[src], id_to_index[dst]))
    edges = np.array(edge_list, dtype=int).reshape(-1, 2)

    with open(splits_path, encoding="utf-8") as fh:
        try:
            split_obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise _parse_error(splits_path, exc.lineno, f"invalid JSON: {exc.msg}") from None
    for key in ("train", "val", "test"):
        if key not in split_obj:
            raise ValueError(f"{splits_path}: missing key {key!r}")
    split_arrays = {}
    for key in ("train", "val", "test"):
        mapped = []
        for node_id in split_obj[key]:
            if node_id not in id_to_index:
                raise ValueError(f"{splits_path}: {key} references unknown node id {node_id}")
            mapped.append(id_to_index[node_id])
        split_arrays[key] = np.array(mapped, dtype=int)

    graph = Graph(
        features=features,
        labels=labels,
        num_classes=len(order),
        edges=edges,
    )
    splits = SplitSpec(
        train_idx=split_arrays["train"],
        val_idx=split_arrays["val"],
        test_idx=split_arrays["test"],
    )
    bundle_name = name if name is not None else nodes_path.stem
    return DatasetBundle(
        graph=graph, splits=splits, name=bundle_name, label_names=tuple(order)
    )


def save_bundle(bundle: DatasetBundle, nodes_path, edges_path, splits_path) -> None:
    """Write a bundle in the three-file format accepted by :func:`load_bundle`."""
    g = bundle.graph
    with open(nodes_path, "w", encoding="utf-8") as fh:
        fh.write("id,label," + ",".join(f"f{j}" for j in range(g.feature_dim)) + "\n")
        for i in range(g.num_nodes):
            label = bundle.label_names[g.labels[i]]
            feats = ",".join(repr(float(v)) for v in g.features[i])
            fh.write(f"{i},{label},{feats}\n")
    with open(edges_path, "w", encoding="utf-8") as fh:
        fh.write("src,dst\n")
        for i, j in g.edges:
            fh.write(f"{i},{j}\n")
    with open(splits_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "train": bundle.splits.train_idx.tolist(),
                "val": bundle.splits.val_idx.tolist(),
                "test": bundle.splits.test_idx.tolist(),
            },
            fh,
        )
        fh.write("\n")


def generate_synthetic(spec: SyntheticSpec) -> DatasetBundle:
    """Sample a labeled cluster graph (planted-partition model).

    Node i belongs to cluster ``i // nodes_per_cluster``; its features are the
    cluster's one-hot-ish centroid plus Gaussian noise. Edges are sampled
    independently with the intra/inter probabilities. Splits are stratified
    per class. Fully deterministic in ``spec.seed``.
    """
    rng = np.random.default_rng(spec.seed)
    c, npc, d = spec.num_clusters, spec.nodes_per_cluster, spec.feature_dim
    n = c * npc
    labels = np.repeat(np.arange(c), npc)

    centroids = np.zeros((c, d))
    centroids[np.arange(c), np.arange(c) % d] = 1.0
    features = centroids[labels] + rng.normal(scale=spec.feature_noise, size=(n, d))

    iu, ju = np.triu_indices(n, k=1)
    same = labels[iu] == labels[ju]
    probs = np.where(same, spec.intra_edge_prob, spec.inter_edge_prob)
    keep = rng.random(iu.shape[0]) < probs
    edges = np.stack([iu[keep], ju[keep]], axis=1)

    train, val, test = [], [], []
    for k in range(c):
        members = np.where(labels == k)[0]
        perm = rng.permutation(members)
        n_train = max(1, int(round(spec.train_fraction * members.size)))
        n_val = max(1, int(round(spec.val_fraction * members.size)))
        train.extend(perm[:n_train])
        val.extend(perm[n_train:n_train + n_val])
        test.extend(perm[n_train + n_val:])

    graph = Graph(features=features, labels=labels, num_classes=c, edges=edges)
    splits = SplitSpec(
        train_idx=np.sort(train), val_idx=np.sort(val), test_idx=np.sort(test)
    )
    return DatasetBundle(graph=graph, splits=splits, name=f"synthetic-{spec.seed}")


def export_embeddings(matrix, path) -> None:
    """Write an (N, D) matrix as CSV with header ``node_id,dim_0,...``.

    Values are written at full precision so a re-parse reproduces them.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.size == 0:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {matrix.shape}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node_id," + ",".join(f"dim_{j}" for j in range(matrix.shape[1])) + "\n")
        for i, row in enumerate(matrix):
            fh.write(f"{i}," + ",".join(repr(float(v)) for v in row) + "\n")


def load_manifest(manifest_path) -> dict:
    """Read a dataset manifest: {name: {"nodes": path, "edges": path, "splits": path}}."""
    manifest_path = Path(manifest_path)
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if not isinstance(manifest, dict):
        raise ValueError(f"{manifest_path}: manifest must be a JSON object")
    return manifest


def resolve_dataset(name: str, manifest_path) -> DatasetBundle:
    """Load the named dataset through a manifest file; paths are manifest-relative."""
    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path)
    if name not in manifest:
        raise KeyError(
            f"dataset {name!r} not in manifest {manifest_path} "
            f"(available: {sorted(manifest)})"
        )
    entry = manifest[name]
    base = manifest_path.parent
    return load_bundle(
        base / entry["nodes"], base / entry["edges"], base / entry["splits"], name=name
    )
