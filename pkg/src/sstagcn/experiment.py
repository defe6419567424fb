"""Experiment harness: multi-seed runs, ablations, depth sweeps, reports.

A single YAML config drives everything; all hyperparameters carry the
defaults used throughout (lr 0.01, 500 iterations, weight decay 5e-4, 16
hidden units, dropout 0), so a minimal config only names the dataset.
"""

from __future__ import annotations

import concurrent.futures
import copy
import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .aggregation import AGGREGATION_METHODS
from .bounds import bound_from_model
from .classifiers import CLASSIFIER_REGISTRY, DEFAULT_CLASSIFIERS
from .datasets import (
    DatasetBundle,
    SyntheticSpec,
    export_embeddings,
    generate_synthetic,
    resolve_dataset,
)
from .gcn import GCNClassifier
from .graph import normalize_adjacency
from .metrics import paired_t_test, summarize_runs
from .pipeline import METHODS, run_single

SYNTHETIC_DEFAULTS = {
    "num_clusters": 4,
    "nodes_per_cluster": 50,
    "feature_dim": 8,
    "intra_edge_prob": 0.1,
    "inter_edge_prob": 0.01,
    "feature_noise": 0.5,
    "seed": 7,
}

GCN_DEFAULTS = {
    "hidden_dims": (16,),
    "learning_rate": 0.01,
    "iterations": 500,
    "weight_decay": 5e-4,
    "dropout": 0.0,
    "decay_scope": "all",
    "early_stop_patience": None,
}


def _normalize_classifiers(entries):
    """Accept "name", {"name":..., "params":...}, or (name, params) entries."""
    specs = []
    for entry in entries:
        if isinstance(entry, str):
            name, params = entry, {}
        elif isinstance(entry, tuple):
            name, params = entry[0], dict(entry[1] or {})
        elif isinstance(entry, dict):
            name = entry.get("name")
            params = dict(entry.get("params") or {})
        else:
            raise ValueError(f"bad classifier entry {entry!r}")
        if name not in CLASSIFIER_REGISTRY:
            raise KeyError(
                f"unknown classifier {name!r}; registry has "
                f"{sorted(CLASSIFIER_REGISTRY)}"
            )
        specs.append((name, params))
    if not specs:
        raise ValueError("classifier list must be non-empty")
    return specs


@dataclass
class ExperimentConfig:
    """Resolved experiment configuration with all defaults filled in."""

    dataset: str = "synthetic"
    manifest: str | None = None
    synthetic: dict = field(default_factory=dict)
    classifiers: list = field(default_factory=lambda: list(DEFAULT_CLASSIFIERS))
    aggregation: str = "voting"
    gcn: dict = field(default_factory=dict)
    methods: tuple = ("sstagcn", "gcn-raw", "stack-only")
    n_runs: int = 30
    seed: int = 0
    out_dir: str = "results"
    jobs: int = 1
    bound_delta: float = 0.05
    bound_alpha_loss: float = 1.0

    def __post_init__(self):
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.aggregation not in AGGREGATION_METHODS + ("mean-label-round",):
            raise ValueError(
                f"aggregation must be one of {AGGREGATION_METHODS}, "
                f"got {self.aggregation!r}"
            )
        self.methods = tuple(self.methods)
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
        self.classifiers = _normalize_classifiers(self.classifiers)
        merged = dict(GCN_DEFAULTS)
        merged.update(self.gcn or {})
        merged["hidden_dims"] = tuple(int(h) for h in merged["hidden_dims"])
        self.gcn = merged
        merged_syn = dict(SYNTHETIC_DEFAULTS)
        merged_syn.update(self.synthetic or {})
        self.synthetic = merged_syn

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw or {})
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    @classmethod
    def from_yaml(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
        if not isinstance(raw, dict):
            raise ValueError(f"{path}: config must be a mapping")
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "manifest": self.manifest,
            "synthetic": dict(self.synthetic),
            "classifiers": [
                {"name": n, "params": dict(p)} for n, p in self.classifiers
            ],
            "aggregation": self.aggregation,
            "gcn": {
                k: (list(v) if isinstance(v, tuple) else v)
                for k, v in self.gcn.items()
            },
            "methods": list(self.methods),
            "n_runs": self.n_runs,
            "seed": self.seed,
            "out_dir": self.out_dir,
            "jobs": self.jobs,
            "bound_delta": self.bound_delta,
            "bound_alpha_loss": self.bound_alpha_loss,
        }


def load_config_bundle(config: ExperimentConfig) -> DatasetBundle:
    """Resolve the config's dataset to a bundle before any training starts."""
    if config.dataset == "synthetic":
        return generate_synthetic(SyntheticSpec(**config.synthetic))
    if not config.manifest:
        raise ValueError(
            f"dataset {config.dataset!r} needs a manifest file to resolve paths"
        )
    return resolve_dataset(config.dataset, config.manifest)


# Worker-process state: the bundle and adjacency ship once per worker instead
# of once per task; the cache reuses deterministic classifier predictions.
_WORKER = {}


def _init_worker(bundle, adj):
    _WORKER["bundle"] = bundle
    _WORKER["adj"] = adj
    _WORKER["cache"] = {}


def _run_task(method, seed, classifier_specs, aggregation, gcn_params):
    art = run_single(
        _WORKER["bundle"],
        method,
        adj=_WORKER["adj"],
        classifier_specs=classifier_specs,
        aggregation_method=aggregation,
        gcn_params=dict(gcn_params),
        seed=seed,
        prediction_cache=_WORKER["cache"],
    )
    return art.result


def _execute_runs(bundle, adj, config, methods, seeds, classifier_specs=None):
    """Run every (method, seed) pair, serially or across processes."""
    specs = classifier_specs if classifier_specs is not None else config.classifiers
    tasks = [(m, s) for m in methods for s in seeds]
    results = {m: [] for m in methods}
    failures = []
    if config.jobs == 1:
        _init_worker(bundle, adj)
        for method, seed in tasks:
            try:
                results[method].append(
                    _run_task(method, seed, specs, config.aggregation, config.gcn)
                )
            except Exception as exc:  # noqa: BLE001 - reported per seed
                failures.append({"method": method, "seed": seed, "error": str(exc)})
    else:
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=config.jobs,
            initializer=_init_worker,
            initargs=(bundle, adj),
        ) as pool:
            futures = {
                pool.submit(
                    _run_task, method, seed, specs, config.aggregation, config.gcn
                ): (method, seed)
                for method, seed in tasks
            }
            for fut in concurrent.futures.as_completed(futures):
                method, seed = futures[fut]
                try:
                    results[method].append(fut.result())
                except Exception as exc:  # noqa: BLE001
                    failures.append(
                        {"method": method, "seed": seed, "error": str(exc)}
                    )
    for method in results:
        results[method].sort(key=lambda r: r.seed)
    failures.sort(key=lambda f: (f["method"], f["seed"]))
    return results, failures


def _method_block(runs):
    return {
        "runs": [r.to_dict() for r in runs],
        "summary": summarize_runs(runs).to_dict() if runs else None,
    }


def run_experiment(config: ExperimentConfig, bundle=None) -> dict:
    """Full multi-seed experiment over the configured methods.

    The report embeds the resolved config and every seed (the reproducibility
    contract), per-method runs with bootstrap summaries, paired t-tests of the
    stacking pipeline against the baselines, and a generalization-bound block
    when the network has one hidden layer.
    """
    if bundle is None:
        bundle = load_config_bundle(config)
    adj = normalize_adjacency(bundle.graph)
    seeds = list(range(config.seed, config.seed + config.n_runs))
    results, failures = _execute_runs(bundle, adj, config, config.methods, seeds)

    report = {
        "config": config.to_dict(),
        "dataset": bundle.name,
        "num_nodes": bundle.graph.num_nodes,
        "num_classes": bundle.graph.num_classes,
        "seeds": seeds,
        "methods": {m: _method_block(results[m]) for m in config.methods},
        "failures": failures,
    }

    if "sstagcn" in config.methods and len(seeds) >= 2:
        comparisons = {}
        base = [r.accuracy for r in results["sstagcn"]]
        for other in config.methods:
            if other == "sstagcn" or len(results[other]) != len(base) or not base:
                continue
            t_stat, p_value = paired_t_test(base, [r.accuracy for r in results[other]])
            comparisons[f"sstagcn_vs_{other}"] = {"t_stat": t_stat, "p_value": p_value}
        report["paired_t_tests"] = comparisons

    if len(config.gcn["hidden_dims"]) == 1 and not failures:
        report["generalization_bound"] = _bound_block(bundle, adj, config)
    return report


def _bound_block(bundle, adj, config):
    """Bound for the first-seed model of the leading GCN-bearing method."""
    method = next((m for m in config.methods if m != "stack-only"), None)
    if method is None:
        return None
    art = run_single(
        bundle,
        method,
        adj=adj,
        classifier_specs=config.classifiers,
        aggregation_method=config.aggregation,
        gcn_params=dict(config.gcn),
        seed=config.seed,
    )
    features = art.aggregated.matrix if method == "sstagcn" else None
    rep = bound_from_model(
        art.model,
        bundle,
        adj,
        alpha_loss=config.bound_alpha_loss,
        delta=config.bound_delta,
        features=features,
    )
    block = rep.to_dict()
    block["method"] = method
    block["seed"] = config.seed
    return block


def run_ablation(config: ExperimentConfig, combos, bundle=None) -> dict:
    """One stacking-pipeline block per classifier subset (accuracy/time grid)."""
    if not combos:
        raise ValueError("need at least one classifier combination")
    base_params = dict(config.classifiers)
    parsed = []
    for combo in combos:
        if not combo:
            raise ValueError("classifier combination must be non-empty")
        parsed.append(
            _normalize_classifiers(
                [(name, base_params.get(name, {})) for name in combo]
            )
        )

    if bundle is None:
        bundle = load_config_bundle(config)
    adj = normalize_adjacency(bundle.graph)
    seeds = list(range(config.seed, config.seed + config.n_runs))

    blocks = []
    all_failures = []
    for combo, specs in zip(combos, parsed):
        results, failures = _execute_runs(
            bundle, adj, config, ["sstagcn"], seeds, classifier_specs=specs
        )
        blocks.append(
            {"classifiers": list(combo), **_method_block(results["sstagcn"])}
        )
        all_failures.extend(failures)
    return {
        "config": config.to_dict(),
        "dataset": bundle.name,
        "seeds": seeds,
        "combos": blocks,
        "failures": all_failures,
    }


def run_depth_sweep(config: ExperimentConfig, depths, bundle=None, out_dir=None) -> dict:
    """Accuracy of gcn-raw and sstagcn across network depths.

    Reports per-depth summaries and the accuracy drop from the shallowest to
    the deepest depth for both methods. Final-layer logits of the first seed
    are exported per depth for external visualization when ``out_dir`` is set.
    """
    depths = sorted(int(d) for d in depths)
    if not depths:
        raise ValueError("need at least one depth")
    if depths[0] < 2 or depths[-1] > 10:
        raise ValueError(f"depths must lie in [2, 10], got {depths}")

    if bundle is None:
        bundle = load_config_bundle(config)
    adj = normalize_adjacency(bundle.graph)
    seeds = list(range(config.seed, config.seed + config.n_runs))
    methods = [m for m in ("gcn-raw", "sstagcn") if m in config.methods] or [
        "gcn-raw",
        "sstagcn",
    ]

    per_depth = {}
    all_failures = []
    hidden_width = config.gcn["hidden_dims"][0]
    for depth in depths:
        depth_cfg = copy.deepcopy(config)
        depth_cfg.gcn["hidden_dims"] = tuple([hidden_width] * (depth - 1))
        results, failures = _execute_runs(bundle, adj, depth_cfg, methods, seeds)
        per_depth[depth] = {m: _method_block(results[m]) for m in methods}
        all_failures.extend(failures)
        if out_dir is not None:
            for m in methods:
                art = run_single(
                    bundle, m, adj=adj,
                    classifier_specs=config.classifiers,
                    aggregation_method=config.aggregation,
                    gcn_params=dict(depth_cfg.gcn), seed=config.seed,
                )
                suffix = "" if m == "sstagcn" else "_gcn_raw"
                export_embeddings(
                    art.logits, Path(out_dir) / f"embeddings_depth{depth}{suffix}.csv"
                )

    drops = {}
    for m in methods:
        accs = {
            d: per_depth[d][m]["summary"]["accuracy_mean"]
            for d in depths
            if per_depth[d][m]["summary"]
        }
        if depths[0] in accs and depths[-1] in accs:
            drops[m] = accs[depths[0]] - accs[depths[-1]]
    report = {
        "config": config.to_dict(),
        "dataset": bundle.name,
        "seeds": seeds,
        "depths": depths,
        "per_depth": {str(d): per_depth[d] for d in depths},
        "accuracy_drop": drops,
        "failures": all_failures,
    }
    if "gcn-raw" in drops and "sstagcn" in drops:
        report["drop_difference"] = drops["gcn-raw"] - drops["sstagcn"]
    return report


def bound_report_from_checkpoint(config: ExperimentConfig, checkpoint_path,
                                 bundle=None) -> dict:
    """Evaluate the generalization bound for a saved two-layer checkpoint."""
    model = GCNClassifier.load(checkpoint_path)
    if bundle is None:
        bundle = load_config_bundle(config)
    adj = normalize_adjacency(bundle.graph)
    features = None
    if model.layer_dims_[0] != bundle.graph.feature_dim:
        # Checkpoint was trained on aggregated features; rebuild them.
        art = run_single(
            bundle, "stack-only", adj=adj,
            classifier_specs=config.classifiers,
            aggregation_method=config.aggregation, seed=config.seed,
        )
        features = art.aggregated.matrix
    rep = bound_from_model(
        model, bundle, adj,
        alpha_loss=config.bound_alpha_loss, delta=config.bound_delta,
        features=features,
    )
    out = rep.to_dict()
    out["checkpoint"] = str(checkpoint_path)
    out["dataset"] = bundle.name
    return out


# --- report output ---------------------------------------------------------


def write_report(report: dict, out_dir) -> Path:
    """Write report.json plus a table-shaped summary.csv; returns the JSON path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    rows = _summary_rows(report)
    if rows:
        with open(out_dir / "summary.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    return json_path


def _summary_rows(report):
    rows = []
    if "methods" in report:
        for block in report["methods"].values():
            if block.get("summary"):
                rows.append(block["summary"])
    elif "combos" in report:
        for block in report["combos"]:
            if block.get("summary"):
                row = dict(block["summary"])
                row["method"] = "+".join(block["classifiers"])
                rows.append(row)
    elif "per_depth" in report:
        for depth, methods in report["per_depth"].items():
            for method, block in methods.items():
                if block.get("summary"):
                    row = dict(block["summary"])
                    row["method"] = f"{method}@depth{depth}"
                    rows.append(row)
    return rows
