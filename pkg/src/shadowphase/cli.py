"""Command-line entry points for sweeps, classification, and analysis utilities.

Sweep commands read an optional JSON config (see SweepConfig.to_json_dict for
the schema) and write CSV/JSON outputs into --out. Analysis commands consume
the features.csv / features.json pair emitted by a sweep. The default worker
count comes from the SHADOWPHASE_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import ml
from .features import read_feature_matrix
from .pipeline import (
    SweepConfig,
    classify_annni,
    classify_kh,
    load_config,
    phase_boundaries,
    run_annni_sweep,
    run_failure_experiment,
    run_kh_sweep,
    write_phase_map,
)


def _sweep_config(args, model: str) -> SweepConfig:
    if args.config:
        cfg = load_config(args.config)
        if cfg.model != model:
            raise SystemExit(f"config is for model {cfg.model!r}, expected {model!r}")
    else:
        size = args.size if args.size else (12 if model == "annni" else 6)
        cfg = SweepConfig(model=model, size=size)
    overrides = {}
    if args.size:
        overrides["size"] = args.size
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.epsilon is not None:
        overrides["epsilon"] = args.epsilon
    if args.budget_override is not None:
        overrides["budget_override"] = args.budget_override
    if args.resolution is not None:
        overrides["resolution"] = args.resolution
    d = cfg.to_json_dict()
    d.update(overrides)
    cfg = SweepConfig.from_json_dict(d)
    cfg.threads = args.threads
    cfg.out_dir = args.out
    return cfg


def _add_sweep_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON sweep config")
    p.add_argument("--size", type=int, help="N (chain sites) or L (ladder rungs)")
    p.add_argument("--seed", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--budget-override", type=int, dest="budget_override")
    p.add_argument("--resolution", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", default="out", help="output directory")


def _features_dir_args(p: argparse.ArgumentParser):
    p.add_argument("--features", required=True, help="directory with features.csv/features.json")
    p.add_argument("--exact", action="store_true", help="use features_exact.csv instead")
    p.add_argument("--out", default="out")


def _load_features(args):
    base = Path(args.features)
    csv = base / ("features_exact.csv" if args.exact else "features.csv")
    return read_feature_matrix(csv, base / "features.json")


def _read_plaquette(base: Path) -> np.ndarray:
    with open(base / "plaquette.csv") as fh:
        fh.readline()
        return np.loadtxt(fh, delimiter=",", ndmin=2)


def cmd_annni_sweep(args):
    cfg = _sweep_config(args, "annni")
    run_annni_sweep(cfg)
    print(f"wrote sweep outputs to {cfg.out_dir} (T={cfg.budget()}, hash={cfg.provenance_hash()})")


def cmd_kh_sweep(args):
    cfg = _sweep_config(args, "kh")
    run_kh_sweep(cfg)
    print(f"wrote sweep outputs to {cfg.out_dir} (T={cfg.budget()}, hash={cfg.provenance_hash()})")


def cmd_classify_annni(args):
    fm = _load_features(args)
    pm = classify_annni(fm, seed=args.seed or 0)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_phase_map(pm, out / "phase_map.csv", out / "phase_map.json")
    print(f"wrote phase map to {out}")


def cmd_classify_kh(args):
    fm = _load_features(args)
    plaquette = _read_plaquette(Path(args.features))
    pm = classify_kh(fm, plaquette, threshold=args.threshold, seed=args.seed or 0)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_phase_map(pm, out / "phase_map.csv", out / "phase_map.json")
    for phi, left, right in phase_boundaries(pm):
        print(f"boundary {left} -> {right} at phi = {phi / np.pi:.3f} pi")
    print(f"wrote phase map to {out}")


def cmd_failure_exp(args):
    cfg = _sweep_config(args, args.model)
    rhos = run_failure_experiment(cfg, trials=args.trials)
    print(f"mean rho_fail = {np.mean(rhos):.4f} over {args.trials} trials (T={cfg.budget()})")


def cmd_elbow(args):
    fm = _load_features(args)
    curve = ml.elbow_curve(fm.values, k_max=args.k_max, seed=args.seed or 0)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ml.write_elbow_curve(curve, out / "elbow.csv")
    print(f"elbow (max second difference) at k = {ml.elbow_point(curve)}")


def cmd_pca(args):
    fm = _load_features(args)
    result = ml.pca(fm.values, n_components=args.components)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ml.write_pca(result, out / "pca.csv", out / "pca.json")
    ratios = ", ".join(f"{r:.4f}" for r in result.explained_variance_ratio)
    print(f"explained variance ratios: {ratios}")


def cmd_persistence(args):
    fm = _load_features(args)
    diagram = ml.h0_persistence(fm.values)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ml.write_diagram(diagram, out / "persistence.csv")
    top = diagram.finite_deaths[-3:][::-1]
    print(f"largest finite deaths: {np.round(top, 4).tolist()}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shadowphase", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annni-sweep", help="estimate ANNNI correlators over a (k, g) grid")
    _add_sweep_flags(p)
    p.set_defaults(func=cmd_annni_sweep)

    p = sub.add_parser("kh-sweep", help="estimate ladder correlators and the plaquette over phi")
    _add_sweep_flags(p)
    p.set_defaults(func=cmd_kh_sweep)

    p = sub.add_parser("classify-annni", help="k=3 clustering of an ANNNI feature matrix")
    _features_dir_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_classify_annni)

    p = sub.add_parser("classify-kh", help="plaquette threshold + k=4 clustering over phi")
    _features_dir_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_classify_kh)

    p = sub.add_parser("failure-exp", help="repeated-trial failure proportions at one point")
    _add_sweep_flags(p)
    p.add_argument("--model", choices=("annni", "kh"), default="annni")
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_failure_exp)

    p = sub.add_parser("elbow", help="inertia-vs-k curve for a feature matrix")
    _features_dir_args(p)
    p.add_argument("--k-max", type=int, default=8, dest="k_max")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_elbow)

    p = sub.add_parser("pca", help="principal components of a feature matrix")
    _features_dir_args(p)
    p.add_argument("--components", type=int, default=2)
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("persistence", help="H0 persistence diagram of a feature matrix")
    _features_dir_args(p)
    p.set_defaults(func=cmd_persistence)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
