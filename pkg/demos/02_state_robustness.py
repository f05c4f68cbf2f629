"""State entanglement monotones with explicit bound directions.

The exact separability-based quantities are intractable, so everything is
computed under a declared relaxation; at two qubits the PPT cone *is* the
separable cone and the values come back tagged "exact".

Run:  python demos/02_state_robustness.py
"""

import numpy as np

from entcost import (
    DensityMatrix, DimSpec, FreeSetRelaxation, gen_robustness_state,
    max_entangled, max_product_overlap, std_robustness_state,
)

pair = DimSpec.of(("A", 2), ("B", 2))
ppt = FreeSetRelaxation.ppt_state()

# ---------------------------------------------------------------------------
# The maximally entangled state of rank K has robustness exactly K.
# ---------------------------------------------------------------------------
for k in (2, 3, 4):
    phi = max_entangled(k)
    bv = gen_robustness_state(phi, ["A"], ppt)
    print(f"generalized robustness of Phi^{k}: {bv.value:.8f}   [{bv.direction}]")

# A separable state sits inside the free set: robustness 1.
sep = DensityMatrix(pair, np.diag([0.5, 0.0, 0.0, 0.5]))
print("\nclassically correlated state:",
      f"{gen_robustness_state(sep, ['A'], ppt).value:.8f}")

# Standard robustness restricts the mixing state to be free as well, so it
# always dominates the generalized version.
phi2 = max_entangled(2)
noisy = DensityMatrix(pair, (phi2.mat + np.eye(4) / 4) / 2)
g = gen_robustness_state(noisy, ["A"], ppt)
s = std_robustness_state(noisy, ["A"], ppt)
print(f"\nnoisy Bell state:  generalized {g.value:.6f}  standard {s.value:.6f}")
print("solver gap on the generalized value:", f"{g.certificate.duality_gap:.1e}")

# ---------------------------------------------------------------------------
# The best product-state overlap with Phi^K is 1/K -- the fact that makes the
# measurement-based simulator separability preserving.
# ---------------------------------------------------------------------------
for k in (2, 3):
    best = max_product_overlap(max_entangled(k), restarts=16, seed=0)
    print(f"max product overlap with Phi^{k}: {best:.6f}  (1/K = {1 / k:.6f})")
