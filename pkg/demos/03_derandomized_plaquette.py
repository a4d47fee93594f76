"""Derandomized measurement of the six-site plaquette across the ladder's
spin-liquid windows: a coarse version of the plaquette-vs-phi curve.

Run: python demos/03_derandomized_plaquette.py  (about a minute)
"""
import numpy as np

from shadowphase import (
    KhParams,
    build_kitaev_heisenberg,
    derandomized_schedule,
    embed_pauli_string,
    estimate_derandomized,
    ground_expectation,
    ground_space,
    plaquette_observable,
)

L = 6
plaq = plaquette_observable(L, offset=1)
print(f"plaquette string: {plaq.labels} (weight {plaq.weight})")

schedule = derandomized_schedule([plaq], T=400)
print(f"derandomized schedule fixes the basis: every round measures "
      f"{''.join(schedule[0][j] for j in plaq.support)} on the window\n")

op = embed_pauli_string(plaq)
print(f"{'phi/pi':>7} {'estimate':>9} {'exact':>7}")
for frac in (0.3, 0.5, 0.7, 1.0, 1.3, 1.5, 1.8):
    phi = frac * np.pi
    gs = ground_space(build_kitaev_heisenberg(KhParams(L, phi)))
    est = estimate_derandomized(gs, schedule, plaq, seed=11)
    exact = ground_expectation(gs, op)
    marker = "  <- spin liquid" if abs(exact) > 0.5 else ""
    print(f"{frac:>7.2f} {est:>9.3f} {exact:>7.3f}{marker}")
