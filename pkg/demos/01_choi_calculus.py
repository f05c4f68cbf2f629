"""Tour of the tensor layer: states, channels, and Choi-matrix calculus.

Run:  python demos/01_choi_calculus.py
"""

import numpy as np

from entcost import (
    DensityMatrix, DimSpec, apply, choi_from_kraus, dephasing_channel,
    identity_channel, kraus_from_choi, max_entangled, partial_trace,
    partial_transpose, random_channel, swap_unitary, unitary_channel,
)

np.set_printoptions(precision=4, suppress=True, linewidth=110)

# ---------------------------------------------------------------------------
# Subsystems are labelled and ordered; every operation names its targets.
# ---------------------------------------------------------------------------
pair = DimSpec.of(("A", 2), ("B", 2))
print("two qubits:", pair.labels, pair.dims, "total dim", pair.total_dim)

phi = max_entangled(2)
print("\nmaximally entangled state Phi^2:")
print(phi.mat.real)

reduced = partial_trace(phi.matrix, phi.dims, ["A"])
print("\nkeeping only A gives the maximally mixed state:")
print(reduced.mat.real)

# The partial transpose detects the entanglement: a separable state stays PSD.
pt = partial_transpose(phi.matrix, phi.dims, ["B"])
print("\neigenvalues of the partial transpose:", np.linalg.eigvalsh(pt.mat).round(6))

# ---------------------------------------------------------------------------
# Channels are stored as trace-one Choi states (input copy first).
# ---------------------------------------------------------------------------
ident = identity_channel(pair)
print("\nidentity channel Choi state equals Phi^4:",
      np.abs(ident.choi.mat - max_entangled(4).mat).max() < 1e-14)

deph = dephasing_channel(DimSpec.of(("A", 2)))
print("dephasing Choi state (diagonal):", np.diag(deph.choi.mat).real)

plus = DensityMatrix(DimSpec.of(("A", 2)), np.array([[0.5, 0.5], [0.5, 0.5]]))
out = apply(deph, plus)
print("dephasing kills coherences:  |+><+|  ->  diag", np.diag(out.mat).real)

# Kraus representations round-trip through the Choi form.
swap = unitary_channel(swap_unitary(2), pair)
kraus = kraus_from_choi(swap)
print("\nswap channel recovered Kraus rank:", len(kraus))
back = choi_from_kraus(kraus, pair, pair)
print("round trip error:", np.abs(back.choi.mat - swap.choi.mat).max())

# Seeded random channels come from isometric dilations: same seed, same channel.
n1 = random_channel(pair, pair, env_dim=3, seed=42)
n2 = random_channel(pair, pair, env_dim=3, seed=42)
print("\nrandom channel is reproducible:", np.array_equal(n1.choi.mat, n2.choi.mat))
marginal = partial_trace(n1.choi.matrix, n1.joint, ["A", "B"])
print("trace preservation (output marginal = I/4):",
      np.abs(marginal.mat - np.eye(4) / 4).max() < 1e-9)
