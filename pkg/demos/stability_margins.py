"""
Where does BP stop being a contraction?
=======================================

The row-sum bound L(beta, eps, d_v, d_c) caps the infinity norm of the BP
Jacobian on clipped biases. This script tabulates it for a few degree
profiles, finds the largest beta that still certifies contraction, and
compares the bound with the measured Jacobian norm on a small graph.

Run with ``python demos/stability_margins.py``.
"""

from __future__ import annotations

import sys

from ldgm_bpgd import BpParams, build_irregular, build_semi_regular, degree_stats
from ldgm_bpgd.stability import analyze, safe_beta_range, stability_table, write_stability_csv

profiles = {"K=2 (d_v=4)": (4, 2), "K=3 (d_v=6)": (6, 3), "irregular (7, 9)": (7, 9)}
rows = stability_table([0.05, 0.1, 0.2, 0.5, 0.9], profiles, epsilon=1e-6)
write_stability_csv(rows, sys.stdout)

# Maximum degrees make the bound pessimistic; mean degrees show the gap.
g = build_irregular(1000, 0.5, seed=0)
prof = degree_stats(g)
print(f"\nirregular N=1000: beta_max by max degrees {safe_beta_range(1e-6, prof.max_code_degree, prof.max_gen_degree):.4f},"
      f" by mean degrees {safe_beta_range(1e-6, prof.mean_code_degree, prof.mean_gen_degree):.4f}")

# Measured Jacobian norm versus the bound on a graph small enough to differentiate.
g = build_semi_regular(24, 0.5, 2, seed=1)
for xi in (0.9, 0.5, 0.2, 0.05):
    beta = (1 - xi) / (1 + xi)
    rep = analyze(g, BpParams(beta, 1 / xi))
    print(f"xi={xi:<5} beta={beta:.3f}  bound={rep.bound:8.3f}  measured={rep.empirical_jacobian_norm:.3f}"
          f"  contractive={rep.contractive}")
