"""Command-line front end: run pipelines, ablations, depth sweeps, bounds.

Subcommands:

* ``run``           -- multi-seed pipeline comparison, writes report.json/summary.csv
* ``ablate``        -- stacking pipeline over classifier subsets
* ``depth-sweep``   -- gcn-raw vs sstagcn across network depths
* ``bound``         -- generalization bound for a saved two-layer checkpoint
* ``gen-synthetic`` -- write a synthetic bundle (nodes/edges/splits + manifest)
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .datasets import SyntheticSpec, generate_synthetic, save_bundle
from .experiment import (
    ExperimentConfig,
    bound_report_from_checkpoint,
    load_config_bundle,
    run_ablation,
    run_depth_sweep,
    run_experiment,
    write_report,
)
from .graph import normalize_adjacency
from .pipeline import METHODS, run_single


def _load_config(args) -> ExperimentConfig:
    if getattr(args, "config", None):
        config = ExperimentConfig.from_yaml(args.config)
    else:
        config = ExperimentConfig()
    if getattr(args, "out", None):
        config.out_dir = args.out
    if getattr(args, "jobs", None):
        config.jobs = args.jobs
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    if getattr(args, "runs", None):
        config.n_runs = args.runs
    if getattr(args, "method", None):
        config.methods = tuple(dict.fromkeys(args.method))
    return config


def _finish(report, config, label) -> int:
    path = write_report(report, config.out_dir)
    print(f"{label} report written to {path}")
    failures = report.get("failures") or []
    if failures:
        failed = ", ".join(f"{f['method']}/seed {f['seed']}" for f in failures)
        print(f"FAILED runs: {failed}", file=sys.stderr)
        return 1
    return 0


def _print_method_summaries(report):
    for method, block in sorted(report.get("methods", {}).items()):
        s = block.get("summary")
        if s:
            print(
                f"  {method:11s} acc {s['accuracy_mean']:.4f} "
                f"+-{s['accuracy_ci95']:.4f}  f1 {s['macro_f1_mean']:.4f} "
                f"+-{s['macro_f1_ci95']:.4f}  ({s['mean_train_seconds']:.2f}s/run)"
            )


def cmd_run(args) -> int:
    config = _load_config(args)
    bundle = load_config_bundle(config)
    report = run_experiment(config, bundle=bundle)
    print(f"dataset {bundle.name}: N={bundle.graph.num_nodes}, "
          f"K={bundle.graph.num_classes}, runs={config.n_runs}")
    _print_method_summaries(report)

    # Save a first-seed checkpoint for each GCN-bearing method so `bound`
    # has something to consume.
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    adj = normalize_adjacency(bundle.graph)
    for method in config.methods:
        if method == "stack-only":
            continue
        art = run_single(
            bundle, method, adj=adj,
            classifier_specs=config.classifiers,
            aggregation_method=config.aggregation,
            gcn_params=dict(config.gcn), seed=config.seed,
        )
        ckpt = out_dir / f"checkpoint_{method.replace('-', '_')}.json"
        art.model.save(ckpt)
        print(f"  checkpoint: {ckpt}")
    return _finish(report, config, "run")


def cmd_ablate(args) -> int:
    config = _load_config(args)
    combos = [combo.split(",") for combo in args.combo]
    report = run_ablation(config, combos)
    for block in report["combos"]:
        s = block.get("summary")
        if s:
            print(
                f"  {'+'.join(block['classifiers']):40s} "
                f"acc {s['accuracy_mean']:.4f} +-{s['accuracy_ci95']:.4f} "
                f"({s['mean_train_seconds']:.2f}s/run)"
            )
    return _finish(report, config, "ablation")


def cmd_depth_sweep(args) -> int:
    config = _load_config(args)
    depths = [int(d) for d in args.depths.split(",")]
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = run_depth_sweep(config, depths, out_dir=out_dir)
    for depth in report["depths"]:
        row = []
        for method, block in report["per_depth"][str(depth)].items():
            if block.get("summary"):
                row.append(f"{method} {block['summary']['accuracy_mean']:.4f}")
        print(f"  depth {depth}: " + "  ".join(row))
    for method, drop in report.get("accuracy_drop", {}).items():
        print(f"  drop {method}: {drop:+.4f}")
    if "drop_difference" in report:
        print(f"  drop difference (gcn-raw - sstagcn): {report['drop_difference']:+.4f}")
    return _finish(report, config, "depth sweep")


def cmd_bound(args) -> int:
    config = _load_config(args)
    report = bound_report_from_checkpoint(config, args.checkpoint)
    print(json.dumps(report, indent=2, sort_keys=True))
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "bound_report.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"bound report written to {path}")
    return 0


def cmd_gen_synthetic(args) -> int:
    spec = SyntheticSpec(
        num_clusters=args.clusters,
        nodes_per_cluster=args.nodes_per_cluster,
        feature_dim=args.feature_dim,
        intra_edge_prob=args.intra,
        inter_edge_prob=args.inter,
        feature_noise=args.noise,
        seed=args.gen_seed,
    )
    bundle = generate_synthetic(spec)
    out_dir = Path(args.out or "synthetic_data")
    out_dir.mkdir(parents=True, exist_ok=True)
    nodes, edges, splits = (
        out_dir / "nodes.csv", out_dir / "edges.csv", out_dir / "splits.json",
    )
    save_bundle(bundle, nodes, edges, splits)
    manifest_path = out_dir / "manifest.json"
    manifest = {}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    manifest[bundle.name] = {
        "nodes": nodes.name, "edges": edges.name, "splits": splits.name,
    }
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    g = bundle.graph
    print(
        f"wrote {bundle.name} to {out_dir}: N={g.num_nodes}, d={g.feature_dim}, "
        f"K={g.num_classes}, |E|={g.edges.shape[0]}"
    )
    print(f"manifest: {manifest_path}")
    return 0


def _add_common(sub):
    sub.add_argument("--config", help="YAML experiment config")
    sub.add_argument("--out", help="output directory (overrides config)")
    sub.add_argument("--jobs", type=int, help="parallel runs")
    sub.add_argument("--seed", type=int, help="base seed")
    sub.add_argument("--runs", type=int, help="number of seeded runs")
    sub.add_argument(
        "--method", action="append", choices=METHODS,
        help="pipeline method; repeat to select several",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sstagcn",
        description="Stacking-fronted GCN experiments for node classification",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_run = subs.add_parser("run", help="multi-seed pipeline comparison")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_abl = subs.add_parser("ablate", help="classifier-combination ablation")
    _add_common(p_abl)
    p_abl.add_argument(
        "--combo", action="append", required=True,
        help="comma-separated classifier names; repeat per combination",
    )
    p_abl.set_defaults(func=cmd_ablate)

    p_depth = subs.add_parser("depth-sweep", help="accuracy across depths")
    _add_common(p_depth)
    p_depth.add_argument("--depths", default="2,3,4,5,6,7",
                         help="comma-separated depths in [2, 10]")
    p_depth.set_defaults(func=cmd_depth_sweep)

    p_bound = subs.add_parser("bound", help="generalization bound for a checkpoint")
    _add_common(p_bound)
    p_bound.add_argument("--checkpoint", required=True, help="model checkpoint JSON")
    p_bound.set_defaults(func=cmd_bound)

    p_gen = subs.add_parser("gen-synthetic", help="write a synthetic dataset bundle")
    p_gen.add_argument("--out", help="output directory (default synthetic_data)")
    p_gen.add_argument("--clusters", type=int, default=4)
    p_gen.add_argument("--nodes-per-cluster", type=int, default=50)
    p_gen.add_argument("--feature-dim", type=int, default=8)
    p_gen.add_argument("--intra", type=float, default=0.1)
    p_gen.add_argument("--inter", type=float, default=0.01)
    p_gen.add_argument("--noise", type=float, default=0.5)
    p_gen.add_argument("--gen-seed", type=int, default=7)
    p_gen.set_defaults(func=cmd_gen_synthetic)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
