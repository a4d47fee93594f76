"""Acceptance suite: one test per exit criterion, at fixed seeds and tolerances.

The two sweep fixtures are session-scoped and shared across criteria; expect
roughly ten to fifteen minutes for the whole module on two cores. Run with

    pytest tests/test_acceptance.py -v

A per-criterion pass/fail summary is printed at the end of the session.
"""

import itertools
import math

import numpy as np
import pytest
import scipy.sparse as sparse
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import pdist, squareform

from shadowphase.ml import elbow_curve, elbow_point, h0_persistence, pca
from shadowphase.pipeline import (
    SweepConfig,
    classify_annni,
    classify_kh,
    phase_boundaries,
    run_annni_sweep,
    run_failure_experiment,
    run_kh_sweep,
)
from shadowphase.shadows import sample_snapshots, snapshot_budget
from shadowphase.spin_ops import PauliString, StateVector, embed_pauli_string, expectation

PI = math.pi

# KSL windows of the ladder phase diagram, used to select "ordered-phase" rows
KSL_WINDOWS = ((0.48 * PI, 0.53 * PI), (1.37 * PI, 1.57 * PI))


def annni_smoke_config(out_dir: str) -> SweepConfig:
    return SweepConfig(
        model="annni", size=12, resolution=21, epsilon=0.1, seed=2024,
        budget_override=2000, threads=2, out_dir=out_dir,
    )


@pytest.fixture(scope="session")
def annni_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("annni_smoke")
    cfg = annni_smoke_config(str(out))
    fm, fm_exact, reports = run_annni_sweep(cfg)
    return cfg, fm, fm_exact, reports, out


@pytest.fixture(scope="session")
def kh_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("kh_full")
    cfg = SweepConfig(model="kh", size=6, resolution=100, epsilon=0.1, seed=2024,
                      threads=2, out_dir=str(out))
    fm, fm_exact, plaquette, reports = run_kh_sweep(cfg)
    return cfg, fm, fm_exact, plaquette, reports


def test_criterion_01_shadow_unbiasedness():
    """20 random 3-qubit states x all weight<=2 Paulis: mean of 1e5 snapshot
    estimates within 4 empirical standard errors of the exact value."""
    n, T = 3, 100_000
    all_paulis = [
        PauliString("".join(c))
        for c in itertools.product("IXYZ", repeat=n)
        if sum(ch != "I" for ch in c) <= 2
    ]
    rng = np.random.default_rng(1234)
    for _ in range(20):
        amps = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
        state = StateVector(amps / np.linalg.norm(amps))
        ens = sample_snapshots(state, T, seed=int(rng.integers(1 << 31)))
        signs = 1.0 - 2.0 * ens.outcomes.astype(np.float64)
        for p in all_paulis:
            # per-snapshot terms recomputed directly from the matched-basis rule
            terms = np.ones(T)
            matched = np.ones(T, dtype=bool)
            for j in p.support:
                matched &= ens.bases[:, j] == "XYZ".index(p.labels[j])
                terms *= signs[:, j]
            terms = np.where(matched, terms * 3.0 ** p.weight, 0.0)
            est = terms.mean()
            se = terms.std(ddof=1) / math.sqrt(T)
            exact = expectation(state, embed_pauli_string(p))
            # the 1e-12 absorbs pure float noise on zero-variance cases (identity)
            assert abs(est - exact) <= 4.0 * se + 1e-12, f"{p.labels}: {est} vs {exact} (se {se})"


def test_criterion_02_budget_arithmetic():
    """Exact snapshot budgets under the natural-log reading."""
    assert snapshot_budget(63, 2, 0.1) == 14916
    assert snapshot_budget(30, 2, 0.1) == 12245


def test_criterion_03_failure_proportion():
    """100 trials at N=8, eps=0.1, full budget: mean rho_fail < 0.05 and at
    least 90 trials with rho_fail <= 2/63."""
    cfg = SweepConfig(model="annni", size=8, epsilon=0.1, seed=77)
    assert cfg.budget() == 13189
    rhos = np.array(run_failure_experiment(cfg, trials=100))
    assert rhos.mean() < 0.05
    assert int((rhos <= 2 / 63 + 1e-12).sum()) >= 90


def _segment_distance(p, a, b):
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))
    t = np.clip(np.dot(p - a, b - a) / np.dot(b - a, b - a), 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * (b - a))))


def _annni_region(k, g):
    """Deep-region membership against the qualitative phase-boundary chords.

    The reference diagram is drawn in Pauli-operator units; with spin-1/2
    operators every critical field sits at half that height, so the Ising
    chord runs (0, 0.5)->(0.5, 0) and the antiphase chord (0.5, 0)->(1, 0.5).
    Points within 0.15 of either chord are left unscored.
    """
    ising = ((0.0, 0.5), (0.5, 0.0))
    anti = ((0.5, 0.0), (1.0, 0.5))
    if min(_segment_distance((k, g), *ising), _segment_distance((k, g), *anti)) <= 0.15:
        return None
    below_ising = g < 0.5 - k
    below_anti = g < k - 0.5
    if below_ising and not below_anti:
        return "ferromagnetic"
    if below_anti and not below_ising:
        return "antiphase"
    if not below_ising and not below_anti:
        return "paramagnetic"
    return None


def test_criterion_04_annni_phase_diagram(annni_run):
    """21x21 smoke sweep at N=12: the three anchors land in distinct clusters
    with their region's names, and >=90% of deep grid points in each region
    get their region's label."""
    _, fm, _, _, _ = annni_run
    pm = classify_annni(fm, seed=0)  # raises if the anchors collide
    lookup = {(round(k, 6), round(g, 6)): l for (k, g), l in zip(pm.params, pm.labels)}
    assert lookup[(0.1, 0.1)] == "ferromagnetic"
    assert lookup[(0.2, 0.9)] == "paramagnetic"
    assert lookup[(0.9, 0.1)] == "antiphase"

    scored = {r: [0, 0] for r in ("ferromagnetic", "paramagnetic", "antiphase")}
    for (k, g), label in zip(pm.params, pm.labels):
        region = _annni_region(k, g)
        if region is not None:
            scored[region][1] += 1
            scored[region][0] += label == region
    for region, (hits, total) in scored.items():
        assert total > 0
        assert hits / total >= 0.90, f"deep {region}: {hits}/{total}"


def test_criterion_05_plaquette_sweep(kh_run):
    """Derandomized plaquette tracks the oracle within 0.1 at every phi, and
    the oracle magnitude at 1.5pi exceeds the one at pi by >= 3x."""
    _, _, _, plaquette, _ = kh_run
    phis, est, exact = plaquette[:, 0], plaquette[:, 1], plaquette[:, 2]
    assert np.abs(est - exact).max() <= 0.1
    at_15 = exact[np.argmin(np.abs(phis - 1.5 * PI))]
    at_pi = exact[np.argmin(np.abs(phis - PI))]
    assert abs(at_15) >= 3.0 * abs(at_pi)


def test_criterion_06_kh_classification(kh_run):
    """k=4 on non-KSL points: anchors in four distinct clusters; ST->RS found
    within 0.05pi of 1.7pi; ZZ->FM within 0.12pi of 0.8pi."""
    _, fm, _, plaquette, _ = kh_run
    pm = classify_kh(fm, plaquette, threshold=0.5, seed=0)  # raises on anchor collision
    assert set(pm.labels) >= {"RS", "ZZ", "FM", "ST"}
    bounds = phase_boundaries(pm)
    st_rs = [b for b in bounds if b[1] == "ST" and b[2] == "RS"]
    assert len(st_rs) == 1
    assert abs(st_rs[0][0] - 1.7 * PI) <= 0.05 * PI
    zz_fm = [b for b in bounds if b[1] == "ZZ" and b[2] == "FM"]
    assert len(zz_fm) == 1
    assert abs(zz_fm[0][0] - 0.8 * PI) <= 0.12 * PI


def _ordered_rows(phis):
    mask = np.ones(phis.size, dtype=bool)
    for lo, hi in KSL_WINDOWS:
        mask &= ~((phis >= lo) & (phis <= hi))
    return mask


def test_criterion_07_elbow_recovery(annni_run, kh_run):
    """KH ordered-phase oracle features: automated elbow at k=4. ANNNI oracle
    features on the reference window (g <= 0.5 in spin-1/2 units, matching the
    Pauli-unit sweep of the source diagrams): inertia slows after k=4, i.e.
    the second difference at k=4 exceeds those at k=5 and k=6."""
    _, _, kh_exact, plaquette, _ = kh_run
    phis = kh_exact.params[:, 0]
    curve = elbow_curve(kh_exact.values[_ordered_rows(phis)], 8, seed=0)
    assert elbow_point(curve) == 4

    _, _, annni_exact, _, _ = annni_run
    window = annni_exact.params[:, 1] <= 0.5 + 1e-9
    curve = elbow_curve(annni_exact.values[window], 8, seed=0)
    inertia = [v for _, v in curve]
    second = {k: inertia[k - 2] - 2 * inertia[k - 1] + inertia[k] for k in (4, 5, 6)}
    assert second[4] > second[5]
    assert second[4] > second[6]


def test_criterion_08_h0_persistence():
    """Three-Gaussian cloud: exactly 3 classes (two merges + the essential)
    persist past 5x the next finite death; deaths equal the MST edge weights
    exactly on 50 random points."""
    rng = np.random.default_rng(5)
    centers = np.array([[0.0, 0.0], [10.0, 0.0], [5.0, 8.66]])
    cloud = np.vstack([rng.normal(c, 0.4, size=(30, 2)) for c in centers])
    diagram = h0_persistence(cloud)
    deaths = sorted((d for _, d in diagram.pairs), reverse=True)
    fourth = deaths[3]
    assert math.isfinite(fourth)
    assert sum(1 for d in deaths if d >= 5 * fourth) == 3

    pts = rng.uniform(size=(50, 4))
    mine = h0_persistence(pts).finite_deaths
    mst = minimum_spanning_tree(sparse.csr_matrix(squareform(pdist(pts))))
    assert np.array_equal(mine, np.sort(mst.data))


def test_criterion_09_pca(kh_run):
    """KH ordered-phase oracle features: nonincreasing variance ratios,
    full-rank reconstruction below 1e-8, and RS / ST / FM-group projection
    centroids pairwise separated by 2x the larger within-group spread."""
    _, _, kh_exact, _, _ = kh_run
    phis = kh_exact.params[:, 0]
    ordered = _ordered_rows(phis)
    X = kh_exact.values[ordered]

    res2 = pca(X, 2)
    assert res2.explained_variance_ratio[0] >= res2.explained_variance_ratio[1]

    full = pca(X, min(X.shape))
    recon = full.projections @ full.components
    assert np.abs(recon - (X - X.mean(axis=0))).max() < 1e-8

    groups = {
        "RS": (phis < 0.48 * PI) | (phis >= 1.7 * PI),
        "FM-group": (phis >= 0.53 * PI) & (phis < 1.37 * PI),  # ZZ and FM overlap
        "ST": (phis > 1.57 * PI) & (phis < 1.7 * PI),
    }
    cents, spreads = {}, {}
    for name, mask in groups.items():
        pts = res2.projections[mask[ordered]]
        cents[name] = pts.mean(axis=0)
        spreads[name] = math.sqrt(((pts - pts.mean(axis=0)) ** 2).sum(axis=1).mean())
    for a, b in itertools.combinations(groups, 2):
        dist = float(np.linalg.norm(cents[a] - cents[b]))
        assert dist > 2.0 * max(spreads[a], spreads[b]), (a, b, dist)


def test_criterion_10_determinism(annni_run, tmp_path):
    """Rerunning the smoke sweep with the same seed gives byte-identical CSVs."""
    _, _, _, _, first_out = annni_run
    cfg = annni_smoke_config(str(tmp_path))
    run_annni_sweep(cfg)
    for name in ("features.csv", "features_exact.csv", "reports.csv"):
        assert (tmp_path / name).read_bytes() == (first_out / name).read_bytes(), name
