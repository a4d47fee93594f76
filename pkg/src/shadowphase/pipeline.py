"""Sweep orchestration: grids, shadow runs, phase classification, file emission.

Per-point work is deterministic given the sweep seed: every grid point gets
its own child of a SeedSequence rooted at the config seed, so results are
identical no matter how many worker processes run the sweep. Outputs are
written in grid order with repr-formatted floats, making reruns byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import features as feat
from . import ml
from .eigensolver import EigensolverError, ground_expectation, ground_space
from .hamiltonians import AnnniParams, KhParams, build_annni, build_kitaev_heisenberg
from .shadows import (
    EstimateReport,
    derandomized_schedule,
    estimate_derandomized,
    estimate_paulis,
    sample_snapshots,
    snapshot_budget,
)

THREADS_ENV_VAR = "SHADOWPHASE_THREADS"

ANNNI_PHASES = ("ferromagnetic", "paramagnetic", "antiphase")
ANNNI_ANCHORS = {"ferromagnetic": (0.1, 0.1), "paramagnetic": (0.2, 0.9), "antiphase": (0.9, 0.1)}
KH_ORDERED_ANCHORS = {"RS": 0.0, "ZZ": 0.65 * math.pi, "FM": math.pi, "ST": 1.62 * math.pi}


class PhaseClassificationError(RuntimeError):
    """Raised when anchor points collide in one cluster (diagnostic, not silent)."""


@dataclass
class SweepConfig:
    """Grid + estimation settings for one sweep; JSON-serializable."""

    model: str
    size: int
    epsilon: float = 0.1
    seed: int = 0
    resolution: int = 21
    k_range: tuple[float, float] = (0.0, 1.0)
    g_range: tuple[float, float] = (0.0, 1.0)
    phi_range: tuple[float, float] = (0.0, 2.0 * math.pi)
    budget_override: int | None = None
    plaquette_rounds: int = 1000
    plaquette_offset: int = 1
    threads: int | None = None
    out_dir: str | None = None

    def __post_init__(self):
        if self.model not in ("annni", "kh"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.resolution < 2:
            raise ValueError(f"resolution must be >= 2, got {self.resolution}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.model == "annni":
            if min(self.k_range) < 0 or min(self.g_range) < 0:
                raise ValueError("ANNNI couplings must be nonnegative")
            AnnniParams(self.size, self.k_range[1], self.g_range[1])
        else:
            lo, hi = self.phi_range
            if not (0 <= lo < hi <= 2 * math.pi):
                raise ValueError(f"phi range {self.phi_range} outside [0, 2*pi]")
            KhParams(self.size, lo)
        if self.budget_override is not None and self.budget_override < 1:
            raise ValueError("budget override must be >= 1")

    def grid(self) -> list[tuple[float, ...]]:
        if self.model == "annni":
            ks = np.linspace(*self.k_range, self.resolution)
            gs = np.linspace(*self.g_range, self.resolution)
            return [(float(k), float(g)) for k in ks for g in gs]
        lo, hi = self.phi_range
        return [(lo + (hi - lo) * j / self.resolution,) for j in range(self.resolution)]

    def budget(self) -> int:
        if self.budget_override is not None:
            return self.budget_override
        if self.model == "annni":
            nominal = feat.annni_observables(self.size).nominal_count
        else:
            nominal = feat.kh_quadrant_observables(self.size).nominal_count
        return snapshot_budget(nominal, 2, self.epsilon)

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d.pop("threads")
        d.pop("out_dir")
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "SweepConfig":
        d = dict(d)
        for key in ("k_range", "g_range", "phi_range"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)

    def provenance_hash(self) -> str:
        blob = json.dumps(self.to_json_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def load_config(path) -> SweepConfig:
    with open(path) as fh:
        return SweepConfig.from_json_dict(json.load(fh))


def _resolve_threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, threads)
    env = os.environ.get(THREADS_ENV_VAR)
    return max(1, int(env)) if env else 1


def _run_tasks(worker, tasks: list, threads: int) -> list:
    """Run `worker` over `tasks`, returning results in task order."""
    if threads <= 1 or len(tasks) <= 1:
        results = [worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(worker, tasks, chunksize=1))
    results.sort(key=lambda r: r[0])
    return results


def _point_seed(child: np.random.SeedSequence) -> int:
    return int(child.generate_state(1, np.uint64)[0])


@lru_cache(maxsize=4)
def _annni_setup(N: int):
    obs_set = feat.annni_observables(N)
    return obs_set, feat.embed_observables(obs_set)


@lru_cache(maxsize=4)
def _kh_setup(L: int, offset: int):
    obs_set = feat.kh_quadrant_observables(L)
    plaq = feat.plaquette_observable(L, offset)
    return obs_set, feat.embed_observables(obs_set), plaq, feat.embed_pauli_string(plaq)


def _annni_point(task):
    idx, N, k, g, T, child = task
    obs_set, ops = _annni_setup(N)
    try:
        gs = ground_space(build_annni(AnnniParams(N, k, g)))
    except EigensolverError as exc:
        raise EigensolverError(f"ground state failed at (k={k}, g={g}): {exc}") from exc
    seed = _point_seed(child)
    ens = sample_snapshots(gs, T, seed)
    estimates = estimate_paulis(ens, obs_set.observables)
    exacts = feat.exact_expectations(gs, ops)
    return idx, estimates, exacts, gs.energy, gs.degeneracy, seed


def _kh_point(task):
    idx, L, phi, T, rounds, offset, schedule, child = task
    obs_set, ops, plaq, plaq_op = _kh_setup(L, offset)
    try:
        gs = ground_space(build_kitaev_heisenberg(KhParams(L, phi)))
    except EigensolverError as exc:
        raise EigensolverError(f"ground state failed at phi={phi}: {exc}") from exc
    shadow_seed, plaq_seed = (_point_seed(c) for c in child.spawn(2))
    ens = sample_snapshots(gs, T, shadow_seed)
    estimates = estimate_paulis(ens, obs_set.observables)
    exacts = feat.exact_expectations(gs, ops)
    plaq_est = estimate_derandomized(gs, schedule, plaq, plaq_seed)
    plaq_exact = ground_expectation(gs, plaq_op)
    return idx, estimates, exacts, plaq_est, plaq_exact, gs.energy, gs.degeneracy, shadow_seed


def _reports_for(obs_set, estimates, exacts, epsilon) -> list[EstimateReport]:
    return [
        EstimateReport.scored(p, e, x, epsilon)
        for p, e, x in zip(obs_set.observables, estimates, exacts)
    ]


def _metadata(cfg: SweepConfig, T: int, seeds: list[int], extra: dict | None = None) -> dict:
    meta = {
        "config": cfg.to_json_dict(),
        "config_hash": cfg.provenance_hash(),
        "budget": T,
        "point_seeds": seeds,
    }
    meta.update(extra or {})
    return meta


def run_annni_sweep(cfg: SweepConfig):
    """Estimate all NN/NNN correlators on the (k, g) grid.

    Returns (estimated FeatureMatrix, exact FeatureMatrix, per-row report lists).
    """
    if cfg.model != "annni":
        raise ValueError("config is not an ANNNI sweep")
    obs_set, _ = _annni_setup(cfg.size)
    grid = cfg.grid()
    T = cfg.budget()
    children = np.random.SeedSequence(cfg.seed).spawn(len(grid))
    tasks = [
        (i, cfg.size, k, g, T, child) for i, ((k, g), child) in enumerate(zip(grid, children))
    ]
    results = _run_tasks(_annni_point, tasks, _resolve_threads(cfg.threads))

    seeds = [r[5] for r in results]
    meta = _metadata(cfg, T, seeds, {"energies": [r[3] for r in results],
                                     "degeneracies": [r[4] for r in results]})
    fm = feat.assemble_feature_matrix(
        [(grid[r[0]], r[1]) for r in results], obs_set, ("k", "g"), meta
    )
    fm_exact = feat.assemble_feature_matrix(
        [(grid[r[0]], r[2]) for r in results], obs_set, ("k", "g"), meta
    )
    reports = [_reports_for(obs_set, r[1], r[2], cfg.epsilon) for r in results]
    if cfg.out_dir:
        _write_sweep_outputs(cfg, fm, fm_exact, reports)
    return fm, fm_exact, reports


def run_kh_sweep(cfg: SweepConfig):
    """Quadrant-correlator estimation plus derandomized plaquette series over phi.

    Returns (estimated FeatureMatrix, exact FeatureMatrix, plaquette ndarray
    with columns (phi, estimate, exact), per-row report lists).
    """
    if cfg.model != "kh":
        raise ValueError("config is not a KH sweep")
    obs_set, _, plaq, _ = _kh_setup(cfg.size, cfg.plaquette_offset)
    grid = cfg.grid()
    T = cfg.budget()
    schedule = derandomized_schedule([plaq], cfg.plaquette_rounds)
    children = np.random.SeedSequence(cfg.seed).spawn(len(grid))
    tasks = [
        (i, cfg.size, phi, T, cfg.plaquette_rounds, cfg.plaquette_offset, schedule, child)
        for i, ((phi,), child) in enumerate(zip(grid, children))
    ]
    results = _run_tasks(_kh_point, tasks, _resolve_threads(cfg.threads))

    seeds = [r[7] for r in results]
    meta = _metadata(cfg, T, seeds, {"plaquette_rounds": cfg.plaquette_rounds,
                                     "plaquette": plaq.labels,
                                     "energies": [r[5] for r in results],
                                     "degeneracies": [r[6] for r in results]})
    fm = feat.assemble_feature_matrix(
        [(grid[r[0]], r[1]) for r in results], obs_set, ("phi",), meta
    )
    fm_exact = feat.assemble_feature_matrix(
        [(grid[r[0]], r[2]) for r in results], obs_set, ("phi",), meta
    )
    plaquette = np.array([[grid[r[0]][0], r[3], r[4]] for r in results])
    reports = [_reports_for(obs_set, r[1], r[2], cfg.epsilon) for r in results]
    if cfg.out_dir:
        _write_sweep_outputs(cfg, fm, fm_exact, reports, plaquette)
    return fm, fm_exact, plaquette, reports


@dataclass
class PhaseMap:
    """Phase label per grid point, with the legend and run provenance."""

    param_names: tuple[str, ...]
    params: np.ndarray
    labels: list[str]
    legend: dict[str, str]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.labels) != self.params.shape[0]:
            raise ValueError("every grid point needs a label")


def _nearest_row(params: np.ndarray, target) -> int:
    return int(np.argmin(((params - np.asarray(target)) ** 2).sum(axis=1)))


def _name_clusters(clustering: ml.Clustering, anchor_rows: dict[str, int]) -> dict[int, str]:
    cluster_of = {name: int(clustering.labels[row]) for name, row in anchor_rows.items()}
    if len(set(cluster_of.values())) != len(cluster_of):
        raise PhaseClassificationError(f"anchor points collide in clusters: {cluster_of}")
    return {c: name for name, c in cluster_of.items()}


def classify_annni(fm: feat.FeatureMatrix, seed: int = 0, restarts: int = 10) -> PhaseMap:
    """k = 3 K-means, clusters named by anchors deep in each known region."""
    clustering = ml.kmeans(fm.values, 3, seed=seed, restarts=restarts)
    anchor_rows = {name: _nearest_row(fm.params, a) for name, a in ANNNI_ANCHORS.items()}
    names = _name_clusters(clustering, anchor_rows)
    labels = [names[int(c)] for c in clustering.labels]
    return PhaseMap(
        param_names=fm.param_names,
        params=fm.params,
        labels=labels,
        legend={
            "ferromagnetic": "aligned Ising order (small k, small g)",
            "paramagnetic": "field-dominated disordered phase (large g)",
            "antiphase": "up-up-down-down order (large k)",
        },
        provenance={"config_hash": fm.metadata.get("config_hash"), "kmeans_seed": seed,
                    "anchors": {n: list(ANNNI_ANCHORS[n]) for n in ANNNI_ANCHORS}},
    )


def classify_kh(
    fm: feat.FeatureMatrix,
    plaquette: np.ndarray,
    threshold: float = 0.5,
    seed: int = 0,
    restarts: int = 10,
) -> PhaseMap:
    """Plaquette-threshold KSL windows plus k = 4 K-means on the remaining points."""
    phis = fm.params[:, 0]
    if plaquette.shape[0] != phis.size or not np.allclose(plaquette[:, 0], phis):
        raise ValueError("plaquette series is not aligned with the feature matrix")
    ksl = np.abs(plaquette[:, 1]) >= threshold
    labels = [""] * phis.size
    for i in np.flatnonzero(ksl):
        labels[i] = "AFK" if phis[i] < math.pi else "FK"

    ordered_rows = np.flatnonzero(~ksl)
    if ordered_rows.size < 4:
        raise PhaseClassificationError("fewer than four non-KSL points to cluster")
    clustering = ml.kmeans(fm.values[ordered_rows], 4, seed=seed, restarts=restarts)
    anchor_rows = {
        name: int(np.argmin(np.abs(phis[ordered_rows] - a)))
        for name, a in KH_ORDERED_ANCHORS.items()
    }
    names = _name_clusters(clustering, anchor_rows)
    for j, row in enumerate(ordered_rows):
        labels[row] = names[int(clustering.labels[j])]
    return PhaseMap(
        param_names=fm.param_names,
        params=fm.params,
        labels=labels,
        legend={
            "RS": "rung-singlet phase",
            "AFK": "antiferromagnetic Kitaev spin liquid",
            "ZZ": "zigzag order",
            "FM": "ferromagnetic order",
            "FK": "ferromagnetic Kitaev spin liquid",
            "ST": "stripy order",
        },
        provenance={"config_hash": fm.metadata.get("config_hash"), "kmeans_seed": seed,
                    "plaquette_threshold": threshold,
                    "anchors": {n: KH_ORDERED_ANCHORS[n] for n in KH_ORDERED_ANCHORS}},
    )


def phase_boundaries(pm: PhaseMap) -> list[tuple[float, str, str]]:
    """Midpoints between consecutive grid points whose labels differ (1-D maps only)."""
    if pm.params.shape[1] != 1:
        raise ValueError("boundaries are defined for 1-D parameter sweeps")
    out = []
    x = pm.params[:, 0]
    for i in range(len(pm.labels) - 1):
        if pm.labels[i] != pm.labels[i + 1]:
            out.append((float(0.5 * (x[i] + x[i + 1])), pm.labels[i], pm.labels[i + 1]))
    return out


def run_failure_experiment(
    cfg: SweepConfig, trials: int, point: tuple | None = None
) -> list[float]:
    """Repeat the whole-observable-set estimation at one parameter point with
    fresh seeds; returns the failure proportion of each trial."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if cfg.model == "annni":
        point = point if point is not None else (0.5, 0.5)
        obs_set, ops = _annni_setup(cfg.size)
        H = build_annni(AnnniParams(cfg.size, *point))
    else:
        point = point if point is not None else (0.3 * math.pi,)
        obs_set, ops, _, _ = _kh_setup(cfg.size, cfg.plaquette_offset)
        H = build_kitaev_heisenberg(KhParams(cfg.size, point[0]))
    gs = ground_space(H)
    exacts = feat.exact_expectations(gs, ops)
    T = cfg.budget()
    rhos = []
    for child in np.random.SeedSequence(cfg.seed).spawn(trials):
        ens = sample_snapshots(gs, T, _point_seed(child))
        estimates = estimate_paulis(ens, obs_set.observables)
        nfail = int(np.sum(np.abs(estimates - exacts) > cfg.epsilon))
        rhos.append(nfail / len(obs_set))
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "failure_proportions.csv", "w", newline="") as fh:
            fh.write("trial,rho_fail\n")
            for i, r in enumerate(rhos):
                fh.write(f"{i},{r!r}\n")
    return rhos


def _write_sweep_outputs(cfg, fm, fm_exact, reports, plaquette=None):
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    feat.write_feature_matrix(fm, out / "features.csv", out / "features.json")
    feat.write_feature_matrix(fm_exact, out / "features_exact.csv")
    write_reports(fm, reports, out / "reports.csv")
    if plaquette is not None:
        with open(out / "plaquette.csv", "w", newline="") as fh:
            fh.write("phi,estimate,exact\n")
            for phi, est, exact in plaquette:
                fh.write(f"{float(phi)!r},{float(est)!r},{float(exact)!r}\n")
    with open(out / "config.json", "w") as fh:
        json.dump(cfg.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_reports(fm: feat.FeatureMatrix, reports, path) -> None:
    names = fm.observable_set.names
    with open(path, "w", newline="") as fh:
        fh.write(",".join(fm.param_names) + ",observable,pauli,estimate,exact,abs_error,within_bound\n")
        for i, row_reports in enumerate(reports):
            prefix = ",".join(repr(float(x)) for x in fm.params[i])
            for name, rep in zip(names, row_reports):
                err = abs(rep.estimate - rep.exact)
                fh.write(
                    f"{prefix},{name},{rep.observable.labels},{rep.estimate!r},"
                    f"{rep.exact!r},{err!r},{int(rep.within_bound)}\n"
                )


def write_phase_map(pm: PhaseMap, csv_path, json_path) -> None:
    with open(csv_path, "w", newline="") as fh:
        fh.write(",".join(pm.param_names) + ",phase\n")
        for i, label in enumerate(pm.labels):
            prefix = ",".join(repr(float(x)) for x in pm.params[i])
            fh.write(f"{prefix},{label}\n")
    payload = {
        "param_names": list(pm.param_names),
        "points": [list(map(float, p)) for p in pm.params],
        "labels": pm.labels,
        "legend": pm.legend,
        "provenance": pm.provenance,
    }
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
