"""Randomized Pauli measurements, classical shadows, and derandomized schedules.

A snapshot is a per-qubit measurement basis (X, Y or Z) plus the observed bit
per qubit. The single-snapshot estimator for a Pauli string P multiplies
3 * (+-1) over P's support when every measured basis there matches P, and is
zero otherwise; averaging over snapshots gives an unbiased estimate of <P>.

Sampling is exact: outcomes are drawn qubit by qubit from the conditional
Born distribution of the (rotated, progressively collapsed) state, vectorized
over snapshots. All randomness comes from one seeded generator in a fixed
draw order (bases, then ground-state choices, then per-qubit uniforms), so
ensembles are bit-reproducible.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .spin_ops import PauliString, StateVector

BASIS_LABELS = "XYZ"

_SQ2 = 1.0 / math.sqrt(2.0)
# Rotations into the measurement basis: measuring psi in basis b equals
# measuring R_b psi in the computational basis.
_ROTATIONS = {
    0: (np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=np.complex128)),       # X: H
    1: (np.array([[_SQ2, -1j * _SQ2], [_SQ2, 1j * _SQ2]], dtype=np.complex128)),  # Y: H S^dag
}


@dataclass(frozen=True)
class Snapshot:
    """One measurement record: per-qubit basis labels and outcome bits."""

    bases: str
    outcomes: tuple[int, ...]

    def __post_init__(self):
        if len(self.bases) != len(self.outcomes):
            raise ValueError("bases and outcomes must have equal length")


@dataclass
class ShadowEnsemble:
    """T snapshots of an n-qubit state; bases/outcomes are (T, n) uint8 arrays.

    Basis codes follow BASIS_LABELS: 0 = X, 1 = Y, 2 = Z.
    """

    n: int
    bases: np.ndarray
    outcomes: np.ndarray
    seed: int

    def __post_init__(self):
        self.bases = np.asarray(self.bases, dtype=np.uint8)
        self.outcomes = np.asarray(self.outcomes, dtype=np.uint8)
        if self.bases.shape != self.outcomes.shape or self.bases.ndim != 2:
            raise ValueError("bases/outcomes must be matching (T, n) arrays")
        if self.bases.shape[0] < 1 or self.bases.shape[1] != self.n:
            raise ValueError(f"need T >= 1 snapshots of width n={self.n}")

    @property
    def T(self) -> int:
        return self.bases.shape[0]

    def __len__(self) -> int:
        return self.T

    def __getitem__(self, m: int) -> Snapshot:
        return Snapshot(
            bases="".join(BASIS_LABELS[b] for b in self.bases[m]),
            outcomes=tuple(int(o) for o in self.outcomes[m]),
        )


@dataclass
class EstimateReport:
    """A shadow estimate next to its exact oracle value, scored against a bound."""

    observable: PauliString
    estimate: float
    exact: float | None = None
    epsilon: float | None = None
    within_bound: bool | None = None

    @classmethod
    def scored(cls, observable, estimate, exact, epsilon) -> "EstimateReport":
        return cls(
            observable=observable,
            estimate=float(estimate),
            exact=float(exact),
            epsilon=float(epsilon),
            within_bound=bool(abs(estimate - exact) <= epsilon),
        )


def _as_state_matrix(source) -> np.ndarray:
    """Normalize a state source to a (d, dim) array of normalized pure states.

    Accepts a StateVector, a 1-D amplitude array, a GroundSpace (uniform draw
    over its basis), or a sequence of the former two.
    """
    if hasattr(source, "basis") and hasattr(source, "degeneracy"):
        states = np.ascontiguousarray(source.basis.T)
    elif isinstance(source, StateVector):
        states = source.amplitudes[None, :]
    elif isinstance(source, np.ndarray):
        states = source[None, :] if source.ndim == 1 else np.asarray(source)
    elif isinstance(source, (list, tuple)):
        rows = [s.amplitudes if isinstance(s, StateVector) else np.asarray(s) for s in source]
        states = np.stack(rows)
    else:
        raise TypeError(f"unsupported state source {type(source).__name__}")
    states = np.asarray(states, dtype=np.complex128)
    dim = states.shape[1]
    if dim < 2 or dim & (dim - 1):
        raise ValueError(f"state dimension {dim} is not a power of two")
    norms = np.linalg.norm(states, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-10):
        raise ValueError("state source produced an unnormalized state")
    return states


def _measure_in_bases(states: np.ndarray, which: np.ndarray, bases: np.ndarray,
                      uniforms: np.ndarray) -> np.ndarray:
    """Outcome bits for measuring states[which[m]] in product bases bases[m].

    Qubits are measured in site order (site 0, the most significant bit,
    first); after each measurement the batch collapses to half its width, so
    the cost per snapshot is ~2 state-vector passes instead of n.
    """
    T, n = bases.shape
    dim = states.shape[1]
    out = np.empty((T, n), dtype=np.uint8)
    chunk = max(16, (1 << 22) // dim)
    for g in range(states.shape[0]):
        rows = np.flatnonzero(which == g) if states.shape[0] > 1 else np.arange(T)
        psi = states[g]
        for lo in range(0, rows.size, chunk):
            sel = rows[lo:lo + chunk]
            B = sel.size
            batch = np.broadcast_to(psi, (B, dim)).copy()
            pcur = np.ones(B)
            for j in range(n):
                half = batch.shape[1] // 2
                view = batch.reshape(B, 2, half)
                bj = bases[sel, j]
                for code in (0, 1):
                    m = bj == code
                    if m.any():
                        r = _ROTATIONS[code]
                        t0, t1 = view[m, 0, :], view[m, 1, :]
                        view[m, 0, :] = r[0, 0] * t0 + r[0, 1] * t1
                        view[m, 1, :] = r[1, 0] * t0 + r[1, 1] * t1
                a0 = view[:, 0, :]
                p0 = np.einsum("br,br->b", a0.real, a0.real)
                p0 += np.einsum("br,br->b", a0.imag, a0.imag)
                bit = (uniforms[sel, j] * pcur >= p0).astype(np.uint8)
                out[sel, j] = bit
                batch = view[np.arange(B), bit, :]
                pcur = np.where(bit, pcur - p0, p0)
            del batch
    return out


def sample_snapshots(state_source, T: int, seed: int) -> ShadowEnsemble:
    """Draw T randomized-Pauli snapshots of a state (or of a uniformly sampled
    ground-space basis state per snapshot). Deterministic given the seed."""
    if T < 1:
        raise ValueError(f"need T >= 1 snapshots, got {T}")
    states = _as_state_matrix(state_source)
    n = int(np.log2(states.shape[1]))
    rng = np.random.default_rng(seed)
    bases = rng.integers(0, 3, size=(T, n), dtype=np.uint8)
    which = rng.integers(0, states.shape[0], size=T) if states.shape[0] > 1 else np.zeros(T, dtype=np.int64)
    uniforms = rng.random((T, n))
    outcomes = _measure_in_bases(states, which, bases, uniforms)
    return ShadowEnsemble(n=n, bases=bases, outcomes=outcomes, seed=seed)


def _encode_observables(observables: list[PauliString], n: int) -> np.ndarray:
    enc = np.zeros((len(observables), n), dtype=np.uint8)
    for i, p in enumerate(observables):
        if p.n != n:
            raise ValueError(f"observable width {p.n} does not match ensemble width {n}")
        enc[i] = ["IXYZ".index(c) for c in p.labels]
    return enc


def estimate_paulis(ens: ShadowEnsemble, observables: list[PauliString]) -> np.ndarray:
    """Shadow estimates (1/T) sum_m 3^w * prod(+-1) [matched] for each observable."""
    signs = 1.0 - 2.0 * ens.outcomes.astype(np.float64)
    est = np.empty(len(observables))
    for i, p in enumerate(observables):
        if p.n != ens.n:
            raise ValueError(f"observable width {p.n} does not match ensemble width {ens.n}")
        support = p.support
        if not support:
            est[i] = 1.0
            continue
        matched = np.ones(ens.T, dtype=bool)
        term = np.ones(ens.T)
        for j in support:
            matched &= ens.bases[:, j] == BASIS_LABELS.index(p.labels[j])
            term *= signs[:, j]
        est[i] = 3.0 ** len(support) * term[matched].sum() / ens.T
    return est


def estimate_pauli(ens: ShadowEnsemble, P: PauliString) -> float:
    return float(estimate_paulis(ens, [P])[0])


def snapshot_budget(M, l: int, epsilon: float) -> int:
    """Snapshot count ceil(4 * 3^l * ln(M) / epsilon^2) for M observables of locality l.

    Natural log throughout; for l = 2 this is T = 36 ln(M) / eps^2.
    """
    if M < 2:
        raise ValueError(f"need M >= 2 observables for a positive budget, got M={M}")
    if l < 1:
        raise ValueError(f"locality must be >= 1, got {l}")
    if epsilon <= 0:
        raise ValueError(f"error bound must be positive, got {epsilon}")
    return math.ceil(4.0 * 3.0**l * math.log(M) / epsilon**2)


def derandomized_schedule(
    observables: list[PauliString], T: int, confidence_eps: float = 0.9
) -> list[str]:
    """Deterministic measurement bases chosen greedily to cover an observable set.

    Qubit by qubit, measurement by measurement, picks the basis minimizing the
    expected confidence-bound cost sum_l exp(-eps^2/2 * hits_l) with the
    still-random portion averaged at its 3^-remaining hit probability. For a
    single observable, this degenerates to measuring its own labels on its
    support in every round.
    """
    if not observables:
        raise ValueError("observable set is empty")
    if T < 1:
        raise ValueError(f"need T >= 1 rounds, got {T}")
    n = observables[0].n
    enc = _encode_observables(observables, n)
    nobs = enc.shape[0]
    supp = enc != 0
    weights = supp.sum(axis=1)
    nu = 1.0 - math.exp(-(confidence_eps**2) / 2.0)
    hit_factor = math.exp(-(confidence_eps**2) / 2.0)
    miss_future = 1.0 - nu * 3.0 ** (-weights.astype(np.float64))

    hit_weight = np.ones(nobs)  # exp(-eps^2/2 * hits) accumulated multiplicatively
    schedule = []
    for m in range(T):
        future = miss_future ** (T - m - 1)
        alive = np.ones(nobs, dtype=bool)
        remaining = supp.sum(axis=1).astype(np.float64)
        assignment = np.empty(n, dtype=np.uint8)
        for q in range(n):
            on_q = supp[:, q]
            rem_after = remaining - on_q
            costs = np.empty(3)
            for code in range(3):
                cur = np.ones(nobs)
                live = alive & (~on_q | (enc[:, q] == code + 1))
                cur[live] = 1.0 - nu * 3.0 ** (-rem_after[live])
                costs[code] = float(np.sum(hit_weight * cur * future))
            best = int(np.argmin(costs))
            assignment[q] = best
            alive &= ~on_q | (enc[:, q] == best + 1)
            remaining = rem_after
        hit_weight[alive] *= hit_factor
        schedule.append("".join(BASIS_LABELS[c] for c in assignment))
    return schedule


def estimate_derandomized(state_source, schedule: list[str], P: PauliString, seed: int) -> float:
    """Measure in the scheduled bases and average prod(+-1) over the rounds that
    match P on its support (direct estimation, no 3^w factor)."""
    if not schedule:
        raise ValueError("empty schedule")
    states = _as_state_matrix(state_source)
    n = int(np.log2(states.shape[1]))
    if P.n != n:
        raise ValueError(f"observable width {P.n} does not match state width {n}")
    bases = np.array([[BASIS_LABELS.index(c) for c in row] for row in schedule], dtype=np.uint8)
    if bases.shape[1] != n:
        raise ValueError("schedule width does not match state width")
    R = bases.shape[0]
    rng = np.random.default_rng(seed)
    which = rng.integers(0, states.shape[0], size=R) if states.shape[0] > 1 else np.zeros(R, dtype=np.int64)
    uniforms = rng.random((R, n))
    outcomes = _measure_in_bases(states, which, bases, uniforms)

    matched = np.ones(R, dtype=bool)
    term = np.ones(R)
    signs = 1.0 - 2.0 * outcomes.astype(np.float64)
    for j in P.support:
        matched &= bases[:, j] == BASIS_LABELS.index(P.labels[j])
        term *= signs[:, j]
    if not matched.any():
        raise ValueError(f"no scheduled round measures {P.labels} on its support")
    return float(term[matched].mean())


def failure_proportion(reports: list[EstimateReport], epsilon: float) -> float:
    """Fraction of reports with |estimate - exact| > epsilon."""
    if not reports:
        raise ValueError("no reports to score")
    if any(r.exact is None for r in reports):
        raise ValueError("every report needs an exact value")
    nfail = sum(1 for r in reports if abs(r.estimate - r.exact) > epsilon)
    return nfail / len(reports)


_MAGIC = b"SHADOWS1"


def save_ensemble(ens: ShadowEnsemble, path) -> None:
    """Write the archive: magic, little-endian <u32 n, u64 T, u64 seed>, then
    bases packed 2 bits/qubit and outcomes packed 1 bit/qubit (row-major,
    most significant bit first within each byte)."""
    basis_bits = np.empty((ens.T * ens.n, 2), dtype=np.uint8)
    flat = ens.bases.reshape(-1)
    basis_bits[:, 0] = flat >> 1
    basis_bits[:, 1] = flat & 1
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IQQ", ens.n, ens.T, ens.seed))
        fh.write(np.packbits(basis_bits.reshape(-1)).tobytes())
        fh.write(np.packbits(ens.outcomes.reshape(-1)).tobytes())


def load_ensemble(path) -> ShadowEnsemble:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ValueError(f"{path}: not a shadow archive")
        n, T, seed = struct.unpack("<IQQ", fh.read(20))
        nb = math.ceil(2 * n * T / 8)
        basis_bits = np.unpackbits(
            np.frombuffer(fh.read(nb), dtype=np.uint8), count=2 * n * T
        ).reshape(-1, 2)
        bases = ((basis_bits[:, 0] << 1) | basis_bits[:, 1]).reshape(T, n).astype(np.uint8)
        no = math.ceil(n * T / 8)
        outcomes = np.unpackbits(
            np.frombuffer(fh.read(no), dtype=np.uint8), count=n * T
        ).reshape(T, n).astype(np.uint8)
    if bases.max(initial=0) > 2:
        raise ValueError(f"{path}: corrupt basis data")
    return ShadowEnsemble(n=int(n), bases=bases, outcomes=outcomes, seed=int(seed))
