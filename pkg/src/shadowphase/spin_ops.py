"""Pauli algebra, state vectors, and sparse operators on n spin-1/2 sites.

Index convention, used everywhere in this package: site 0 is the MOST
significant bit of a computational-basis index, so basis state |b_0 b_1 ... >
has index sum_j b_j * 2**(n-1-j). Kronecker products are taken in site order,
matching numpy's convention (first factor = most significant).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

PAULI_LABELS = "IXYZ"

_PAULI_2X2 = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

DEFAULT_MAX_SITES = 14


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-site Pauli operators, e.g. "IXZY"."""

    labels: str

    def __post_init__(self):
        bad = set(self.labels) - set(PAULI_LABELS)
        if bad:
            raise ValueError(f"invalid Pauli labels {sorted(bad)} in {self.labels!r}")
        if not self.labels:
            raise ValueError("empty Pauli string")

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def weight(self) -> int:
        """Number of non-identity sites."""
        return sum(1 for c in self.labels if c != "I")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(j for j, c in enumerate(self.labels) if c != "I")

    @classmethod
    def from_sites(cls, n: int, placed: dict[int, str]) -> "PauliString":
        """Build an n-site string with `placed[site] = label`, identity elsewhere."""
        labels = ["I"] * n
        for site, lab in placed.items():
            if not 0 <= site < n:
                raise ValueError(f"site {site} out of range for n={n}")
            labels[site] = lab
        return cls("".join(labels))

    def __str__(self) -> str:
        return self.labels


@dataclass
class StateVector:
    """Normalized pure state of n spin-1/2 sites."""

    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        dim = self.amplitudes.size
        if dim < 2 or dim & (dim - 1):
            raise ValueError(f"amplitude count {dim} is not a power of two")
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")

    @property
    def n(self) -> int:
        return int(np.log2(self.amplitudes.size))

    @classmethod
    def computational(cls, n: int, index: int) -> "StateVector":
        amp = np.zeros(2**n, dtype=np.complex128)
        amp[index] = 1.0
        return cls(amp)


@dataclass
class SparseOperator:
    """Hermitian operator on the 2^n-dimensional Hilbert space, stored sparsely."""

    n: int
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def dim(self) -> int:
        return 2**self.n

    def hermiticity_defect(self) -> float:
        d = self.matrix - self.matrix.getH()
        return 0.0 if d.nnz == 0 else float(np.abs(d.data).max())


def pauli_matrix(label: str) -> np.ndarray:
    """The standard single-qubit Pauli matrix for label in {I, X, Y, Z}."""
    try:
        return _PAULI_2X2[label].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli label {label!r}") from None


def embed_pauli_string(ps: PauliString, max_sites: int = DEFAULT_MAX_SITES) -> SparseOperator:
    """Kronecker-product embedding of a Pauli string (site 0 = most significant bit).

    The matrix is built directly from its action on basis states: a Pauli
    string has exactly one nonzero per row, P|z> = phase(z) |z ^ flip_mask>.
    """
    n = ps.n
    if n > max_sites:
        raise ValueError(f"n={n} exceeds the configured cap of {max_sites} sites")
    dim = 2**n
    flip_mask = 0
    phase_sites_z = []
    phase_sites_y = []
    for j, lab in enumerate(ps.labels):
        bitpos = n - 1 - j
        if lab in ("X", "Y"):
            flip_mask |= 1 << bitpos
        if lab == "Z":
            phase_sites_z.append(bitpos)
        elif lab == "Y":
            phase_sites_y.append(bitpos)

    cols = np.arange(dim, dtype=np.int64)
    rows = cols ^ flip_mask
    data = np.ones(dim, dtype=np.complex128)
    for bitpos in phase_sites_z:
        data *= 1.0 - 2.0 * ((cols >> bitpos) & 1)
    for bitpos in phase_sites_y:
        data *= 1j * (1.0 - 2.0 * ((cols >> bitpos) & 1))
    matrix = sp.csr_matrix((data, (rows, cols)), shape=(dim, dim))
    return SparseOperator(n=n, matrix=matrix)


def pauli_sum(
    terms: list[tuple[float, PauliString]], max_sites: int = DEFAULT_MAX_SITES
) -> SparseOperator:
    """Real linear combination sum_k c_k P_k as a sparse operator."""
    if not terms:
        raise ValueError("empty term list")
    n = terms[0][1].n
    if any(p.n != n for _, p in terms):
        raise ValueError("all terms must act on the same number of sites")
    acc = None
    for coeff, ps in terms:
        m = coeff * embed_pauli_string(ps, max_sites=max_sites).matrix
        acc = m if acc is None else acc + m
    return SparseOperator(n=n, matrix=acc.tocsr())


def expectation(state: StateVector, op: SparseOperator) -> float:
    """<psi|O|psi> for Hermitian O; the exact oracle that shadow estimates are scored against."""
    if state.amplitudes.size != op.dim:
        raise ValueError(f"dimension mismatch: state dim {state.amplitudes.size}, operator dim {op.dim}")
    val = np.vdot(state.amplitudes, op.matrix @ state.amplitudes)
    if abs(val.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}; operator not Hermitian?")
    return float(val.real)
