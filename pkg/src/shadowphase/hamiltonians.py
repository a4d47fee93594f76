"""ANNNI chain and Kitaev-Heisenberg ladder Hamiltonians.

Both models use spin-1/2 operators S = sigma/2, so every two-spin term carries
a factor 1/4 and every field term a factor 1/2 relative to its Pauli string.

ANNNI chain (open boundaries, J1 = 1 sets the scale):

    H = - sum_i Sz_i Sz_{i+1} + k sum_i Sz_i Sz_{i+2} - g sum_i Sx_i

Kitaev-Heisenberg two-leg ladder (periodic legs, K = sin phi, J = cos phi):
alternating x/y Kitaev bonds along each leg (pattern shifted between legs),
z Kitaev bonds on every rung, and a Heisenberg term on every bond.

Ladder sites are numbered rung-major: site(i, leg) = 2*(i-1) + (leg-1) for
rung i = 1..L and leg in {1, 2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .spin_ops import PauliString, SparseOperator, pauli_sum


@dataclass(frozen=True)
class AnnniParams:
    """ANNNI couplings: N sites, k = J2/J1, g = h/J1."""

    N: int
    k: float
    g: float

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N={self.N}: need at least 2 sites")
        if self.k < 0 or self.g < 0:
            raise ValueError(f"couplings must be nonnegative, got k={self.k}, g={self.g}")


@dataclass(frozen=True)
class KhParams:
    """Kitaev-Heisenberg ladder: L rungs (N = 2L spins), angle phi with K=sin(phi), J=cos(phi)."""

    L: int
    phi: float

    def __post_init__(self):
        if self.L < 4 or self.L % 2:
            raise ValueError(f"L={self.L}: need even L >= 4 (x/y bond alternation must close)")
        if not 0 <= self.phi < 2 * math.pi:
            raise ValueError(f"phi={self.phi} outside [0, 2*pi)")


def build_annni(p: AnnniParams) -> SparseOperator:
    """Open-boundary ANNNI Hamiltonian: N-1 NN terms, N-2 NNN terms, N field terms."""
    n = p.N
    terms: list[tuple[float, PauliString]] = []
    for i in range(n - 1):
        terms.append((-0.25, PauliString.from_sites(n, {i: "Z", i + 1: "Z"})))
    for i in range(n - 2):
        terms.append((0.25 * p.k, PauliString.from_sites(n, {i: "Z", i + 2: "Z"})))
    for i in range(n):
        terms.append((-0.5 * p.g, PauliString.from_sites(n, {i: "X"})))
    return pauli_sum(terms)


def ladder_site(i: int, leg: int, L: int) -> int:
    """Flat index of rung i (1-based, wraps mod L) on leg 1 or 2."""
    if leg not in (1, 2):
        raise ValueError(f"leg must be 1 or 2, got {leg}")
    return 2 * ((i - 1) % L) + (leg - 1)


def kitaev_leg_bond_label(i: int, leg: int) -> str:
    """Kitaev label of the leg bond (i, i+1): alternating X/Y, shifted between legs."""
    if leg == 1:
        return "X" if i % 2 == 1 else "Y"
    return "Y" if i % 2 == 1 else "X"


def build_kitaev_heisenberg(p: KhParams) -> SparseOperator:
    """Kitaev-Heisenberg ladder Hamiltonian with periodic legs."""
    L = p.L
    n = 2 * L
    K = math.sin(p.phi)
    J = math.cos(p.phi)
    terms: list[tuple[float, PauliString]] = []

    def add_two(coeff: float, a: int, la: str, b: int, lb: str):
        terms.append((0.25 * coeff, PauliString.from_sites(n, {a: la, b: lb})))

    # Kitaev leg bonds: x on (2i-1, 2i) / y on (2i, 2i+1) for leg 1, pattern shifted on leg 2
    for i in range(1, L // 2 + 1):
        add_two(K, ladder_site(2 * i - 1, 1, L), "X", ladder_site(2 * i, 1, L), "X")
        add_two(K, ladder_site(2 * i, 1, L), "Y", ladder_site(2 * i + 1, 1, L), "Y")
        add_two(K, ladder_site(2 * i, 2, L), "X", ladder_site(2 * i + 1, 2, L), "X")
        add_two(K, ladder_site(2 * i - 1, 2, L), "Y", ladder_site(2 * i, 2, L), "Y")
    for i in range(1, L + 1):
        # Heisenberg on both leg bonds, Kitaev z + Heisenberg on the rung
        for leg in (1, 2):
            for a in "XYZ":
                add_two(J, ladder_site(i, leg, L), a, ladder_site(i + 1, leg, L), a)
        add_two(K, ladder_site(i, 1, L), "Z", ladder_site(i, 2, L), "Z")
        for a in "XYZ":
            add_two(J, ladder_site(i, 1, L), a, ladder_site(i, 2, L), a)
    return pauli_sum(terms)
