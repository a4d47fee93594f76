"""Miniature ANNNI pipeline: sweep a coarse grid, cluster the correlators,
and print the resulting phase diagram as ASCII art.

Run: python demos/04_annni_phase_diagram.py  (a couple of minutes)
Outputs land in ./demo_out/annni.
"""
from shadowphase import SweepConfig, classify_annni, run_annni_sweep

cfg = SweepConfig(
    model="annni",
    size=8,
    resolution=9,
    budget_override=1000,  # smoke budget; drop the override for the full snapshot count
    seed=11,
    out_dir="demo_out/annni",
)
fm, fm_exact, reports = run_annni_sweep(cfg)
n_out = sum(1 for row in reports for r in row if not r.within_bound)
print(f"swept {fm.n_rows} points; {n_out} of {fm.n_rows * len(reports[0])} "
      f"estimates outside eps={cfg.epsilon}")

pm = classify_annni(fm, seed=0)
symbol = {"ferromagnetic": "F", "paramagnetic": "P", "antiphase": "A"}
lookup = {(round(k, 6), round(g, 6)): symbol[l] for (k, g), l in zip(fm.params, pm.labels)}

ks = sorted({round(k, 6) for k, _ in fm.params})
gs = sorted({round(g, 6) for _, g in fm.params}, reverse=True)
print("\n  g\\k " + " ".join(f"{k:4.2f}" for k in ks))
for g in gs:
    print(f" {g:4.2f} " + "    ".join(lookup[(k, g)] for k in ks))
print("\nF = ferromagnetic, P = paramagnetic, A = antiphase")
print("files written to demo_out/annni/")
