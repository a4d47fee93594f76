"""The unsupervised toolbox on synthetic data: K-means + elbow, PCA, and the
H0 persistence diagram of three Gaussian blobs.

Run: python demos/05_clustering_toolkit.py
"""
import numpy as np

from shadowphase import elbow_curve, elbow_point, h0_persistence, kmeans, pca

rng = np.random.default_rng(3)
centers = np.array([[0.0, 0.0], [10.0, 0.0], [5.0, 8.66]])  # equilateral triangle
X = np.vstack([rng.normal(c, 0.6, size=(40, 2)) for c in centers])

curve = elbow_curve(X, k_max=7, seed=0)
print("k  inertia")
for k, inertia in curve:
    bar = "#" * int(40 * inertia / curve[0][1])
    print(f"{k}  {inertia:9.1f} {bar}")
print(f"elbow at k = {elbow_point(curve)}\n")

clusters = kmeans(X, 3, seed=0)
sizes = np.bincount(clusters.labels)
print(f"k-means: sizes={sizes.tolist()}, inertia={clusters.inertia:.1f}")
print(f"centroids:\n{np.round(clusters.centroids, 2)}\n")

res = pca(X, 2)
print(f"pca ratios: {np.round(res.explained_variance_ratio, 3).tolist()}")

diagram = h0_persistence(X)
deaths = diagram.finite_deaths
print(f"\nH0 persistence: {len(diagram.pairs)} classes, largest finite deaths "
      f"{np.round(deaths[-3:][::-1], 2).tolist()}")
print("two long-lived merges + one essential class = three blobs")
