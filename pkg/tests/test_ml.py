import math

import numpy as np
import pytest
import scipy.sparse as sparse
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import squareform, pdist

from shadowphase.ml import (
    elbow_curve,
    elbow_point,
    h0_persistence,
    kmeans,
    pca,
    write_clustering,
    write_diagram,
    write_elbow_curve,
    write_pca,
)


def two_pair_data():
    return np.array([[0.0], [0.0], [10.0], [10.0]])


def blobs(means, per=40, sigma=0.3, seed=0, dim=2):
    rng = np.random.default_rng(seed)
    pts = [rng.normal(m, sigma, size=(per, dim)) for m in means]
    return np.vstack(pts)


class TestKmeans:
    def test_separated_duplicates(self):
        c = kmeans(two_pair_data(), 2, seed=0)
        assert c.inertia == pytest.approx(0.0, abs=1e-18)
        assert sorted(c.centroids.ravel().tolist()) == [0.0, 10.0]
        assert c.labels[0] == c.labels[1] and c.labels[2] == c.labels[3]

    def test_single_cluster_inertia(self):
        c = kmeans(two_pair_data(), 1, seed=0)
        assert c.centroids.ravel()[0] == pytest.approx(5.0)
        assert c.inertia == pytest.approx(100.0)

    def test_k_equals_rows(self):
        X = np.array([[0.0], [3.0], [7.0], [11.0]])
        c = kmeans(X, 4, seed=1)
        assert c.inertia == pytest.approx(0.0, abs=1e-18)

    def test_rejects_bad_k(self):
        with pytest.raises(ValueError):
            kmeans(two_pair_data(), 5, seed=0)
        with pytest.raises(ValueError):
            kmeans(two_pair_data(), 0, seed=0)

    def test_deterministic(self):
        X = blobs([(0, 0), (5, 5), (0, 6)], seed=3)
        a = kmeans(X, 3, seed=9)
        b = kmeans(X, 3, seed=9)
        assert np.array_equal(a.labels, b.labels)
        assert a.inertia == b.inertia

    def test_translation_invariance(self):
        X = blobs([(0, 0), (4, 4)], seed=5)
        a = kmeans(X, 2, seed=2)
        b = kmeans(X + 13.7, 2, seed=2)
        assert np.array_equal(a.labels, b.labels)

    @settings(max_examples=15, deadline=None)
    @given(st.floats(0.1, 20.0))
    def test_inertia_scales_quadratically(self, scale):
        X = blobs([(0, 0), (6, 1)], per=15, seed=8)
        a = kmeans(X, 2, seed=4)
        b = kmeans(scale * X, 2, seed=4)
        assert b.inertia == pytest.approx(scale**2 * a.inertia, rel=1e-8, abs=1e-12)

    def test_recovers_cluster_count(self):
        # elbow (max second difference) lands at the true m; equidistant
        # centers (simplex vertices) keep the inertia curve linear below m
        hits = trials = 0
        for m in range(2, 7):
            centers = 10.0 * np.eye(m)
            for seed in range(8):
                X = blobs(centers, per=25, sigma=0.4, seed=seed, dim=m)
                curve = elbow_curve(X, k_max=8, seed=seed)
                hits += elbow_point(curve) == m
                trials += 1
        assert hits / trials >= 0.95


class TestElbow:
    def test_hand_computed_curve(self):
        curve = elbow_curve(two_pair_data(), 4, seed=0)
        assert curve[0] == (1, pytest.approx(100.0))
        assert [v for _, v in curve[1:]] == pytest.approx([0.0, 0.0, 0.0], abs=1e-18)

    def test_nonincreasing_on_noise(self):
        rng = np.random.default_rng(12)
        X = rng.uniform(size=(40, 3))
        curve = elbow_curve(X, 8, seed=0)
        values = [v for _, v in curve]
        assert all(values[i + 1] <= values[i] * (1 + 1e-9) for i in range(len(values) - 1))

    def test_single_entry(self):
        curve = elbow_curve(two_pair_data(), 1, seed=0)
        assert len(curve) == 1

    def test_kmax_exceeds_rows(self):
        with pytest.raises(ValueError):
            elbow_curve(two_pair_data(), 5, seed=0)

    def test_sharp_elbow_at_three(self):
        X = blobs([(0, 0), (12, 0), (0, 12)], per=30, sigma=0.5, seed=2)
        curve = elbow_curve(X, 7, seed=0)
        assert elbow_point(curve) == 3


class TestPca:
    def test_collinear_data(self):
        t = np.linspace(-1, 1, 30)
        X = np.stack([2 * t, -3 * t], axis=1)
        res = pca(X, 2)
        assert res.explained_variance_ratio[0] == pytest.approx(1.0, abs=1e-10)

    def test_isotropic_gaussian(self):
        rng = np.random.default_rng(7)
        X = rng.standard_normal((10000, 2))
        res = pca(X, 2)
        assert res.explained_variance_ratio[0] == pytest.approx(0.5, abs=0.02)
        assert res.explained_variance_ratio[1] == pytest.approx(0.5, abs=0.02)

    def test_full_rank_ratios_sum_to_one(self):
        rng = np.random.default_rng(8)
        X = rng.uniform(size=(20, 4))
        res = pca(X, 4)
        assert res.explained_variance_ratio.sum() == pytest.approx(1.0, abs=1e-10)
        assert np.all(np.diff(res.explained_variance_ratio) <= 1e-12)

    def test_reconstruction_at_full_rank(self):
        rng = np.random.default_rng(9)
        X = rng.uniform(size=(15, 5))
        res = pca(X, 5)
        recon = res.projections @ res.components
        assert np.abs(recon - (X - X.mean(axis=0))).max() < 1e-8

    def test_sign_convention(self):
        rng = np.random.default_rng(10)
        X = rng.uniform(size=(25, 3))
        res = pca(X, 3)
        for row in res.components:
            assert row[int(np.argmax(np.abs(row)))] > 0

    def test_degenerate_input_flagged(self):
        X = np.ones((6, 3))
        res = pca(X, 2)
        assert res.degenerate
        assert np.all(res.explained_variance_ratio == 0.0)

    def test_component_bound(self):
        with pytest.raises(ValueError):
            pca(np.ones((3, 2)), 3)


class TestPersistence:
    def test_three_point_line(self):
        diagram = h0_persistence(np.array([[0.0], [1.0], [10.0]]))
        assert diagram.finite_deaths.tolist() == [1.0, 9.0]
        assert len(diagram.pairs) == 3

    def test_single_point(self):
        diagram = h0_persistence(np.array([[3.0, 4.0]]))
        assert len(diagram.pairs) == 1
        assert math.isinf(diagram.pairs[0][1])

    def test_births_zero_one_essential(self):
        diagram = h0_persistence(np.random.default_rng(0).uniform(size=(12, 2)))
        assert all(b == 0.0 for b, _ in diagram.pairs)
        assert sum(1 for _, d in diagram.pairs if math.isinf(d)) == 1

    def test_three_blob_structure(self):
        X = blobs([(0, 0), (10, 0), (0, 10)], per=30, sigma=0.4, seed=1)
        diagram = h0_persistence(X)
        deaths = diagram.finite_deaths
        # two large merge events plus the essential class: three persistent pieces
        assert deaths[-2] >= 5 * deaths[-3]

    @settings(max_examples=20, deadline=None)
    @given(st.integers(2, 50), st.integers(0, 10_000))
    def test_matches_mst_oracle(self, npts, seed):
        X = np.random.default_rng(seed).uniform(size=(npts, 3))
        deaths = h0_persistence(X).finite_deaths
        dense = squareform(pdist(X))
        mst = minimum_spanning_tree(sparse.csr_matrix(dense))
        oracle = np.sort(mst.data)
        assert np.array_equal(deaths, oracle)


class TestWriters:
    def test_elbow_csv(self, tmp_path):
        write_elbow_curve([(1, 10.0), (2, 1.0)], tmp_path / "e.csv")
        lines = (tmp_path / "e.csv").read_text().splitlines()
        assert lines[0] == "k,inertia"
        assert lines[1] == "1,10.0"

    def test_clustering_json(self, tmp_path):
        c = kmeans(two_pair_data(), 2, seed=0)
        write_clustering(c, tmp_path / "c.json")
        import json

        payload = json.loads((tmp_path / "c.json").read_text())
        assert payload["k"] == 2 and len(payload["labels"]) == 4

    def test_pca_files(self, tmp_path):
        res = pca(np.random.default_rng(3).uniform(size=(8, 3)), 2)
        write_pca(res, tmp_path / "p.csv", tmp_path / "p.json")
        assert (tmp_path / "p.csv").read_text().splitlines()[0] == "pc1,pc2"

    def test_diagram_csv(self, tmp_path):
        d = h0_persistence(np.array([[0.0], [2.0]]))
        write_diagram(d, tmp_path / "d.csv")
        lines = (tmp_path / "d.csv").read_text().splitlines()
        assert lines[0] == "birth,death"
        assert lines[-1].endswith("inf")
