"""Classical shadows in a nutshell: sample snapshots of a small state and
compare shadow estimates with exact expectations.

Run: python demos/01_shadows_basics.py
"""
import numpy as np

from shadowphase import (
    PauliString,
    StateVector,
    embed_pauli_string,
    estimate_pauli,
    expectation,
    sample_snapshots,
    snapshot_budget,
)

# a 3-qubit GHZ state
amps = np.zeros(8, dtype=complex)
amps[0] = amps[7] = 1 / np.sqrt(2)
ghz = StateVector(amps)

# how many snapshots do we need for 9 two-local observables at eps = 0.2?
T = snapshot_budget(M=9, l=2, epsilon=0.2)
print(f"budget for M=9, l=2, eps=0.2: T = {T}")

ens = sample_snapshots(ghz, T, seed=7)
print(f"sampled {ens.T} snapshots of n={ens.n} qubits")
print(f"first snapshot: bases={ens[0].bases} outcomes={ens[0].outcomes}")

print(f"\n{'observable':>10} {'estimate':>9} {'exact':>7}")
for labels in ("ZZI", "IZZ", "XXX", "ZII", "XYY"):
    p = PauliString(labels)
    est = estimate_pauli(ens, p)
    exact = expectation(ghz, embed_pauli_string(p))
    print(f"{labels:>10} {est:>9.3f} {exact:>7.3f}")
