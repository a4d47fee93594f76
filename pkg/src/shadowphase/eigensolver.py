"""Ground-space computation for sparse Hermitian operators.

Three paths, all deterministic:
  * diagonal operators: exact classical minimization (needed at g = 0, where
    frustrated points can have ground degeneracies in the hundreds),
  * dimension <= 64: dense diagonalization,
  * otherwise: ARPACK (implicitly restarted Lanczos) with a seeded start
    vector, escalating the subspace size until the ground multiplet is
    resolved with a margin of clearly-separated higher states, followed by a
    deflation check that no degenerate copy was missed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .spin_ops import SparseOperator, StateVector


class EigensolverError(RuntimeError):
    """Raised on non-convergence or an unresolvable ground multiplet."""


@dataclass
class GroundSpace:
    """Lowest eigenvalue with an orthonormal basis of its eigenspace (columns)."""

    energy: float
    basis: np.ndarray

    @property
    def degeneracy(self) -> int:
        return self.basis.shape[1]

    def basis_states(self) -> list[StateVector]:
        return [StateVector(self.basis[:, j]) for j in range(self.degeneracy)]


def _tol_window(energy: float, degeneracy_tol: float) -> float:
    return degeneracy_tol * max(1.0, abs(energy))


def _diagonal_ground_space(diag: np.ndarray, degeneracy_tol: float) -> GroundSpace:
    energy = float(diag.min())
    idx = np.flatnonzero(diag <= energy + _tol_window(energy, degeneracy_tol))
    basis = np.zeros((diag.size, idx.size), dtype=np.complex128)
    basis[idx, np.arange(idx.size)] = 1.0
    return GroundSpace(energy=energy, basis=basis)


def _dense_ground_space(matrix: sp.csr_matrix, degeneracy_tol: float) -> GroundSpace:
    vals, vecs = np.linalg.eigh(matrix.toarray())
    energy = float(vals[0])
    keep = vals <= energy + _tol_window(energy, degeneracy_tol)
    return GroundSpace(energy=energy, basis=np.ascontiguousarray(vecs[:, keep]))


def _deflated_lowest(matrix, basis: np.ndarray, shift: float, v0: np.ndarray, maxiter: int):
    """Lowest eigenpair of H + shift * P, with P projecting onto span(basis)."""
    dim = matrix.shape[0]

    def matvec(x):
        return matrix @ x + shift * (basis @ (basis.conj().T @ x))

    op = spla.LinearOperator((dim, dim), matvec=matvec, dtype=np.complex128)
    vals, vecs = spla.eigsh(op, k=1, which="SA", v0=v0, maxiter=maxiter)
    return float(vals[0]), vecs[:, 0]


def ground_space(
    H: SparseOperator,
    degeneracy_tol: float = 1e-9,
    seed: int = 7,
    max_degeneracy: int = 48,
) -> GroundSpace:
    """All eigenvectors within `degeneracy_tol` (relative) of the lowest eigenvalue.

    Raises EigensolverError on ARPACK non-convergence or if the multiplet
    cannot be resolved within `max_degeneracy` Lanczos vectors. Degenerate
    multiplets larger than that are only reachable through diagonal
    operators, which take the exact path.
    """
    matrix = H.matrix
    dim = matrix.shape[0]
    if dim > 2**14:
        raise ValueError(f"dimension {dim} exceeds the 2^14 support cap")

    coo = matrix.tocoo()
    if not np.any((coo.row != coo.col) & (coo.data != 0)):
        return _diagonal_ground_space(matrix.diagonal().real, degeneracy_tol)
    if dim <= 64:
        return _dense_ground_space(matrix, degeneracy_tol)

    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(dim)
    maxiter = 10 * dim
    margin = 6

    k = 8
    while True:
        k = min(k, dim - 2)
        try:
            vals, vecs = spla.eigsh(matrix, k=k, which="SA", v0=v0, maxiter=maxiter)
        except spla.ArpackNoConvergence as exc:
            raise EigensolverError(f"ARPACK did not converge (k={k}, dim={dim})") from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        energy = float(vals[0])
        window = _tol_window(energy, degeneracy_tol)
        count = int(np.sum(vals <= energy + window))
        if k - count >= margin or k >= min(dim - 2, max_degeneracy + margin):
            break
        k = min(2 * k, dim - 2)
    if count > max_degeneracy:
        raise EigensolverError(
            f"ground degeneracy {count} exceeds max_degeneracy={max_degeneracy}"
        )

    basis = np.linalg.qr(vecs[:, :count])[0]

    # Deflation check: push the found space up and look for a missed copy.
    bound = float(np.abs(matrix).sum(axis=1).max())
    shift = 2.0 * (bound - energy) + 1.0
    for _ in range(max_degeneracy):
        try:
            val, vec = _deflated_lowest(matrix, basis, shift, v0, maxiter)
        except spla.ArpackNoConvergence as exc:
            raise EigensolverError("ARPACK did not converge in deflation check") from exc
        if val < energy - window:
            raise EigensolverError(
                f"deflation found a lower eigenvalue ({val} < {energy}); Lanczos sweep unreliable"
            )
        if val > energy + window:
            break
        vec = vec - basis @ (basis.conj().T @ vec)
        nrm = np.linalg.norm(vec)
        if nrm < 1e-8:
            break
        basis = np.hstack([basis, (vec / nrm)[:, None]])
    else:
        raise EigensolverError("deflation check failed to terminate")

    gs = GroundSpace(energy=energy, basis=basis)
    _validate(matrix, gs, window)
    return gs


def _validate(matrix, gs: GroundSpace, window: float):
    limit = max(1e-8, 2.0 * window)
    for j in range(gs.degeneracy):
        v = gs.basis[:, j]
        if np.linalg.norm(matrix @ v - gs.energy * v) > limit:
            raise EigensolverError("ground-space residual exceeds tolerance")


def ground_expectation(gs: GroundSpace, op: SparseOperator) -> float:
    """Expectation in the ground space: pure-state value, or the maximally mixed
    ground-space state tr(P op)/d when degenerate (basis-independent)."""
    if gs.basis.shape[0] != op.dim:
        raise ValueError(f"dimension mismatch: basis dim {gs.basis.shape[0]}, operator dim {op.dim}")
    acc = 0.0
    for j in range(gs.degeneracy):
        v = gs.basis[:, j]
        acc += np.vdot(v, op.matrix @ v).real
    return float(acc / gs.degeneracy)
