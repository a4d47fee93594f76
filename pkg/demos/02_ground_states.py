"""Build the two Hamiltonians, solve for ground spaces, and look at
correlators across a phase boundary.

Run: python demos/02_ground_states.py
"""
import numpy as np

from shadowphase import (
    AnnniParams,
    KhParams,
    PauliString,
    build_annni,
    build_kitaev_heisenberg,
    embed_pauli_string,
    ground_expectation,
    ground_space,
)

# ANNNI chain: sweep the transverse field through the Ising transition at k=0
N = 8
zz = embed_pauli_string(PauliString.from_sites(N, {3: "Z", 4: "Z"}))
xx = embed_pauli_string(PauliString.from_sites(N, {3: "X", 4: "X"}))
print("ANNNI N=8, k=0.1: mid-chain correlators vs g")
print(f"{'g':>5} {'energy':>9} {'deg':>4} {'<zz>':>7} {'<xx>':>7}")
for g in (0.1, 0.5, 1.0, 1.5):
    gs = ground_space(build_annni(AnnniParams(N, 0.1, g)))
    print(
        f"{g:>5.2f} {gs.energy:>9.4f} {gs.degeneracy:>4d} "
        f"{ground_expectation(gs, zz):>7.3f} {ground_expectation(gs, xx):>7.3f}"
    )

# Kitaev-Heisenberg ladder: the rung singlet at phi=0 vs ferromagnet at phi=pi
L = 4
rung = embed_pauli_string(PauliString.from_sites(2 * L, {0: "Z", 1: "Z"}))
print("\nKH ladder L=4: rung <zz> at the two Heisenberg points")
for phi in (0.0, np.pi):
    gs = ground_space(build_kitaev_heisenberg(KhParams(L, phi)))
    print(f"phi={phi / np.pi:.1f}pi: energy={gs.energy:.4f} deg={gs.degeneracy} "
          f"rung <zz>={ground_expectation(gs, rung):+.3f}")
