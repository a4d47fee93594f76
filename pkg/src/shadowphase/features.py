"""Observable sets (feature maps) for each model, and feature-matrix assembly.

Correlator features are reported in Pauli normalization <sigma^a_i sigma^a_j>,
so exact values live in [-1, 1] regardless of couplings. Site numbering in
column names is 1-based; ladder sites use the rung-major flat index from
`hamiltonians.ladder_site`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .eigensolver import GroundSpace, ground_expectation
from .hamiltonians import kitaev_leg_bond_label, ladder_site
from .spin_ops import PauliString, SparseOperator, embed_pauli_string

ANNNI_MODEL = "annni"
KH_CORRELATORS_MODEL = "kh-correlators"
KH_PLAQUETTE_MODEL = "kh-plaquette"


@dataclass
class ObservableSet:
    """An ordered list of Pauli observables plus the budget-relevant counts.

    `nominal_count` is the observable count fed into the snapshot budget; for
    the ladder quadrant set it can exceed the deduplicated feature count.
    """

    model: str
    observables: list[PauliString]
    names: list[str]
    locality: int
    nominal_count: int

    def __post_init__(self):
        if len(self.observables) != len(self.names):
            raise ValueError("names and observables must align")
        if any(p.weight > self.locality for p in self.observables):
            raise ValueError("observable weight exceeds declared locality")

    def __len__(self) -> int:
        return len(self.observables)


def _pair_observables(n: int, pairs: list[tuple[int, int]]) -> tuple[list[PauliString], list[str]]:
    obs, names = [], []
    for i, j in pairs:
        for a in "xyz":
            obs.append(PauliString.from_sites(n, {i: a.upper(), j: a.upper()}))
            names.append(f"{a}{a}_{i + 1}_{j + 1}")
    return obs, names


def annni_observables(N: int) -> ObservableSet:
    """sigma^a sigma^a on every NN and NNN pair, a in {x, y, z}: 3(2N-3) observables.

    Order: NN pairs by left site, then NNN pairs by left site, xx/yy/zz within
    each pair.
    """
    if N < 3:
        raise ValueError(f"need N >= 3 for an NNN pair, got N={N}")
    pairs = [(i, i + 1) for i in range(N - 1)] + [(i, i + 2) for i in range(N - 2)]
    obs, names = _pair_observables(N, pairs)
    return ObservableSet(
        model=ANNNI_MODEL, observables=obs, names=names, locality=2, nominal_count=len(obs)
    )


def kh_quadrant_observables(L: int) -> ObservableSet:
    """Correlators over each 4-spin quadrant of the ladder, deduplicated.

    Quadrant i (i = 1..L-1) covers rungs i and i+1: two leg bonds, two rungs,
    two diagonals. Rungs shared by adjacent quadrants appear once. The
    nominal count 3N - 6 (N = 2L) is what the snapshot budget uses.
    """
    if L < 4 or L % 2:
        raise ValueError(f"need even L >= 4, got L={L}")
    n = 2 * L
    pairs: list[tuple[int, int]] = []
    seen = set()
    for i in range(1, L):
        quadrant = [
            (ladder_site(i, 1, L), ladder_site(i + 1, 1, L)),
            (ladder_site(i, 2, L), ladder_site(i + 1, 2, L)),
            (ladder_site(i, 1, L), ladder_site(i, 2, L)),
            (ladder_site(i + 1, 1, L), ladder_site(i + 1, 2, L)),
            (ladder_site(i, 1, L), ladder_site(i + 1, 2, L)),
            (ladder_site(i, 2, L), ladder_site(i + 1, 1, L)),
        ]
        for a, b in quadrant:
            key = (min(a, b), max(a, b))
            if key not in seen:
                seen.add(key)
                pairs.append(key)
    obs, names = _pair_observables(n, pairs)
    return ObservableSet(
        model=KH_CORRELATORS_MODEL,
        observables=obs,
        names=names,
        locality=2,
        nominal_count=3 * n - 6,
    )


def plaquette_observable(L: int, offset: int = 1) -> PauliString:
    """The six-site XYZXYZ plaquette on the 3-rung window starting at rung `offset`.

    Each outer site carries the Kitaev label of the leg bond leaving the
    window, and both middle-rung sites carry Z (the rung label); this makes
    the string the conserved flux of the pure Kitaev ladder, with ground
    expectation of magnitude one deep in the spin-liquid regime.
    """
    if L < 4 or L % 2:
        raise ValueError(f"need even L >= 4, got L={L}")
    if not 1 <= offset <= L - 2:
        raise ValueError(f"window [{offset}, {offset + 2}] out of range for L={L}")
    n = 2 * L
    r = offset
    placed = {
        ladder_site(r, 1, L): kitaev_leg_bond_label((r - 2) % L + 1, 1),
        ladder_site(r + 1, 1, L): "Z",
        ladder_site(r + 2, 1, L): kitaev_leg_bond_label((r + 1) % L + 1, 1),
        ladder_site(r, 2, L): kitaev_leg_bond_label((r - 2) % L + 1, 2),
        ladder_site(r + 1, 2, L): "Z",
        ladder_site(r + 2, 2, L): kitaev_leg_bond_label((r + 1) % L + 1, 2),
    }
    return PauliString.from_sites(n, placed)


def kh_plaquette_set(L: int, offset: int = 1) -> ObservableSet:
    p = plaquette_observable(L, offset)
    return ObservableSet(
        model=KH_PLAQUETTE_MODEL,
        observables=[p],
        names=[f"plaquette_{offset}"],
        locality=6,
        nominal_count=1,
    )


def embed_observables(obs_set: ObservableSet) -> list[SparseOperator]:
    """Sparse operators for each observable (reused across a sweep)."""
    return [embed_pauli_string(p) for p in obs_set.observables]


def exact_expectations(gs: GroundSpace, ops: list[SparseOperator]) -> np.ndarray:
    """Oracle feature row: exact ground-space expectations of each operator."""
    return np.array([ground_expectation(gs, op) for op in ops])


@dataclass
class FeatureMatrix:
    """Rows = parameter points, columns = observable estimates, plus metadata."""

    param_names: tuple[str, ...]
    params: np.ndarray
    values: np.ndarray
    observable_set: ObservableSet
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.params = np.atleast_2d(np.asarray(self.params, dtype=np.float64))
        self.values = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        if self.params.shape[0] != self.values.shape[0]:
            raise ValueError("params and values disagree on row count")
        if self.params.shape[1] != len(self.param_names):
            raise ValueError("params and param_names disagree on column count")
        if self.values.shape[1] != len(self.observable_set):
            raise ValueError("values and observable set disagree on column count")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature matrix has missing or non-finite entries")
        cap = 9.0 ** self.observable_set.locality
        if np.abs(self.values).max() > cap:
            raise ValueError("feature magnitude exceeds the estimator range")

    @property
    def n_rows(self) -> int:
        return self.params.shape[0]


def assemble_feature_matrix(
    rows: list[tuple[tuple, np.ndarray]],
    observable_set: ObservableSet,
    param_names: tuple[str, ...],
    metadata: dict | None = None,
) -> FeatureMatrix:
    """Stack per-point feature rows, sorted by parameter tuple."""
    if not rows:
        raise ValueError("empty sweep")
    width = len(observable_set)
    for p, v in rows:
        if np.asarray(v).size != width:
            raise ValueError("row width does not match the observable set")
    rows = sorted(rows, key=lambda r: tuple(r[0]))
    params = np.array([r[0] for r in rows], dtype=np.float64)
    values = np.array([np.asarray(r[1], dtype=np.float64) for r in rows])
    return FeatureMatrix(
        param_names=tuple(param_names),
        params=params,
        values=values,
        observable_set=observable_set,
        metadata=dict(metadata or {}),
    )


def _fmt(x: float) -> str:
    return repr(float(x))


def write_feature_matrix(fm: FeatureMatrix, csv_path, json_path=None) -> None:
    """CSV with parameter columns then named observable columns; JSON sidecar
    carries the model, counts, and run metadata."""
    header = list(fm.param_names) + list(fm.observable_set.names)
    lines = [",".join(header)]
    for i in range(fm.n_rows):
        cells = [_fmt(x) for x in fm.params[i]] + [_fmt(x) for x in fm.values[i]]
        lines.append(",".join(cells))
    with open(csv_path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    if json_path is not None:
        sidecar = {
            "model": fm.observable_set.model,
            "param_names": list(fm.param_names),
            "observable_names": list(fm.observable_set.names),
            "observables": [p.labels for p in fm.observable_set.observables],
            "locality": fm.observable_set.locality,
            "nominal_count": fm.observable_set.nominal_count,
            "metadata": fm.metadata,
        }
        with open(json_path, "w") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_feature_matrix(csv_path, json_path) -> FeatureMatrix:
    with open(json_path) as fh:
        sidecar = json.load(fh)
    with open(csv_path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    param_names = sidecar["param_names"]
    if header[: len(param_names)] != param_names:
        raise ValueError(f"{csv_path}: header does not match sidecar parameter names")
    obs_set = ObservableSet(
        model=sidecar["model"],
        observables=[PauliString(s) for s in sidecar["observables"]],
        names=sidecar["observable_names"],
        locality=sidecar["locality"],
        nominal_count=sidecar["nominal_count"],
    )
    p = len(param_names)
    return FeatureMatrix(
        param_names=tuple(param_names),
        params=data[:, :p],
        values=data[:, p:],
        observable_set=obs_set,
        metadata=sidecar.get("metadata", {}),
    )
