"""Unsupervised analysis of feature matrices: K-means, elbow, PCA, H0 persistence.

Everything is deterministic given a seed. Features arrive on the shared
[-1, 1] correlator scale, so no standardization is applied before clustering.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist


def _as_matrix(X) -> np.ndarray:
    if hasattr(X, "values") and hasattr(X, "observable_set"):
        X = X.values
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.size == 0:
        raise ValueError("empty feature matrix")
    return X


@dataclass
class Clustering:
    k: int
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    seed: int


def _plus_plus_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Seeding with probability proportional to squared distance from chosen centers."""
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    first = int(rng.integers(n))
    centers[0] = X[first]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = X[idx]
        d2 = np.minimum(d2, ((X - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(X: np.ndarray, centers: np.ndarray, max_iter: int = 300, shift_tol: float = 1e-8):
    k = centers.shape[0]
    prev_inertia = math.inf
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)  # argmin takes the lowest index on ties
        inertia = float(d2[np.arange(X.shape[0]), labels].sum())
        if inertia > prev_inertia * (1 + 1e-12) + 1e-12:
            raise RuntimeError("Lloyd iteration increased the inertia")
        prev_inertia = inertia
        new_centers = centers.copy()
        assigned_d2 = d2[np.arange(X.shape[0]), labels]
        reseat_order = iter(np.argsort(-assigned_d2))
        for c in range(k):
            members = labels == c
            if members.any():
                new_centers[c] = X[members].mean(axis=0)
            else:
                # re-seat an empty cluster at the farthest not-yet-used point
                new_centers[c] = X[int(next(reseat_order))]
        shift = np.abs(new_centers - centers).max()
        centers = new_centers
        if shift < shift_tol:
            break
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    inertia = float(d2[np.arange(X.shape[0]), labels].sum())
    return labels.astype(np.int64), centers, inertia


def kmeans(X, k: int, seed: int = 0, restarts: int = 10) -> Clustering:
    """Best-of-restarts Lloyd K-means with ++-style seeding; deterministic given seed."""
    X = _as_matrix(X)
    if not 1 <= k <= X.shape[0]:
        raise ValueError(f"need 1 <= k <= {X.shape[0]} rows, got k={k}")
    if restarts < 1:
        raise ValueError("need at least one restart")
    best = None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        labels, centers, inertia = _lloyd(X, _plus_plus_init(X, k, rng))
        if best is None or inertia < best[2] - 1e-15:
            best = (labels, centers, inertia)
    labels, centers, inertia = best
    return Clustering(k=k, labels=labels, centroids=centers, inertia=inertia, seed=seed)


def elbow_curve(X, k_max: int, seed: int = 0, restarts: int = 10) -> list[tuple[int, float]]:
    """Inertia for k = 1..k_max; nonincreasing (retries with more restarts if not)."""
    X = _as_matrix(X)
    if k_max > X.shape[0]:
        raise ValueError(f"k_max={k_max} exceeds {X.shape[0]} rows")
    curve: list[tuple[int, float]] = []
    for k in range(1, k_max + 1):
        inertia = kmeans(X, k, seed=seed, restarts=restarts).inertia
        if curve and inertia > curve[-1][1]:
            inertia = kmeans(X, k, seed=seed + 1, restarts=4 * restarts).inertia
        if curve and inertia > curve[-1][1] * (1 + 1e-9):
            raise RuntimeError(f"inertia increased at k={k} despite retries")
        curve.append((k, float(inertia)))
    return curve


def elbow_point(curve: list[tuple[int, float]]) -> int:
    """k with the largest second difference of log-inertia (smallest k on ties).

    The log scale makes the kink detection invariant under rescaling and
    keeps one dominant early drop (one far-outlying cluster) from masking the
    true elbow, which a raw second difference is prone to.
    """
    if len(curve) < 3:
        raise ValueError("need at least three k values to locate an elbow")
    ks = [k for k, _ in curve]
    inert = np.array([v for _, v in curve], dtype=np.float64)
    floor = 1e-12 * max(inert[0], 1.0)
    logs = np.log(np.maximum(inert, floor))
    second = logs[:-2] - 2 * logs[1:-1] + logs[2:]
    return ks[1 + int(np.argmax(second))]


@dataclass
class PcaResult:
    projections: np.ndarray
    explained_variance_ratio: np.ndarray
    components: np.ndarray
    mean: np.ndarray
    degenerate: bool = False


def pca(X, n_components: int) -> PcaResult:
    """SVD principal components of the column-centered matrix.

    Sign convention: the largest-magnitude entry of each component is
    positive. Zero-variance input is returned flagged with all-zero ratios.
    """
    X = _as_matrix(X)
    if not 1 <= n_components <= min(X.shape):
        raise ValueError(f"n_components must be in [1, {min(X.shape)}], got {n_components}")
    mean = X.mean(axis=0)
    centered = X - mean
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    total = float((svals**2).sum())
    if total <= 0:
        comps = vt[:n_components]
        return PcaResult(
            projections=np.zeros((X.shape[0], n_components)),
            explained_variance_ratio=np.zeros(n_components),
            components=comps,
            mean=mean,
            degenerate=True,
        )
    comps = vt[:n_components].copy()
    for row in comps:
        if row[int(np.argmax(np.abs(row)))] < 0:
            row *= -1.0
    return PcaResult(
        projections=centered @ comps.T,
        explained_variance_ratio=(svals[:n_components] ** 2) / total,
        components=comps,
        mean=mean,
    )


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


@dataclass
class PersistenceDiagram:
    """H0 birth-death pairs; births are all 0 and exactly one class is essential."""

    pairs: list[tuple[float, float]]

    def __post_init__(self):
        if any(b != 0.0 for b, _ in self.pairs):
            raise ValueError("H0 births must all be zero")
        if sum(1 for _, d in self.pairs if math.isinf(d)) != 1:
            raise ValueError("expected exactly one essential class")

    @property
    def finite_deaths(self) -> np.ndarray:
        return np.array(sorted(d for _, d in self.pairs if math.isfinite(d)))


def h0_persistence(X, metric: str = "euclidean") -> PersistenceDiagram:
    """Exact H0 Vietoris-Rips persistence via Kruskal on the point cloud.

    Components all appear at radius 0; one dies at each minimum-spanning-tree
    edge weight (in merge order), and one survives forever.
    """
    X = _as_matrix(X)
    n = X.shape[0]
    if n == 1:
        return PersistenceDiagram(pairs=[(0.0, math.inf)])
    cond = pdist(X, metric=metric)
    edges = []
    idx = 0
    for i in range(n):
        for j in range(i + 1, n):
            edges.append((float(cond[idx]), i, j))
            idx += 1
    edges.sort()
    uf = _UnionFind(n)
    deaths = []
    for w, i, j in edges:
        if uf.union(i, j):
            deaths.append(w)
            if len(deaths) == n - 1:
                break
    pairs = [(0.0, d) for d in deaths] + [(0.0, math.inf)]
    return PersistenceDiagram(pairs=pairs)


def write_elbow_curve(curve: list[tuple[int, float]], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("k,inertia\n")
        for k, v in curve:
            fh.write(f"{k},{v!r}\n")


def write_clustering(c: Clustering, path) -> None:
    payload = {
        "k": c.k,
        "seed": c.seed,
        "inertia": c.inertia,
        "labels": c.labels.tolist(),
        "centroids": c.centroids.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_pca(result: PcaResult, csv_path, json_path) -> None:
    ncomp = result.projections.shape[1]
    with open(csv_path, "w", newline="") as fh:
        fh.write(",".join(f"pc{i + 1}" for i in range(ncomp)) + "\n")
        for row in result.projections:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    payload = {
        "explained_variance_ratio": result.explained_variance_ratio.tolist(),
        "components": result.components.tolist(),
        "mean": result.mean.tolist(),
        "degenerate": result.degenerate,
    }
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_diagram(diagram: PersistenceDiagram, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("birth,death\n")
        for b, d in diagram.pairs:
            fh.write(f"{b!r},{'inf' if math.isinf(d) else repr(d)}\n")
