"""Channel monotones: max relative entropy, log-robustness, smoothing, power.

Run:  python demos/03_channel_robustness.py
"""

import numpy as np

from entcost import (
    DimSpec, FreeSetRelaxation, dmax_channels, gen_log_robustness_channel,
    identity_channel, random_channel, rob_gen_power, std_log_robustness_channel,
    swap_unitary, unitary_channel,
)

pair = DimSpec.of(("A", 2), ("B", 2))
ppt_choi = FreeSetRelaxation.ppt_choi()
sampled = FreeSetRelaxation.sepp_sampled(count=48, seed=0)

ident = identity_channel(pair)
swap = unitary_channel(swap_unitary(2), pair)

# ---------------------------------------------------------------------------
# Two relaxed free cones, two different readings of the swap.
#
# Under the PPT-Choi cone the swap is maximally expensive (2 bits); under the
# sampled separability-preserving cone it is free, because swapping the two
# sides maps every product input to a product output.
# ---------------------------------------------------------------------------
for name, ch in (("identity", ident), ("swap", swap)):
    a = gen_log_robustness_channel(ch, ppt_choi, 0.0)
    b = gen_log_robustness_channel(ch, sampled, 0.0)
    print(f"{name:9s}  ppt-choi {a.value:.6f} [{a.direction}]   "
          f"sepp-sampled {b.value:.6f} [{b.direction}]")

# ---------------------------------------------------------------------------
# Smoothing: allowing an epsilon ball around the target only shrinks the value.
# ---------------------------------------------------------------------------
noisy = random_channel(pair, pair, env_dim=2, seed=11)
print("\nsmoothed values for a random channel:")
for eps in (0.0, 0.01, 0.1):
    g = gen_log_robustness_channel(noisy, ppt_choi, eps)
    s = std_log_robustness_channel(noisy, ppt_choi, eps)
    print(f"  eps={eps:<5}  generalized {g.value:.6f}   standard {s.value:.6f}")

# The optimal free channel of the robustness program certifies the value
# through the max relative entropy.
bv = gen_log_robustness_channel(noisy, ppt_choi, 0.0)
sol = bv.certificate
from entcost.tensorcore import project_to_channel  # solver output clean-up

m_star = project_to_channel(sol.variables["W"] / sol.variables["lam"] / noisy.d_in,
                            noisy.in_dims, noisy.out_dims)
print("\nplugging the optimal free channel back in:",
      f"dmax = {dmax_channels(noisy, m_star).value:.6f}",
      f"vs robustness {bv.value:.6f}")

# ---------------------------------------------------------------------------
# Robustness-generating power: the best output robustness over product inputs.
# The swap moves entanglement around but never creates it.
# ---------------------------------------------------------------------------
cnot = np.eye(4)
cnot[2, 2] = cnot[3, 3] = 0.0
cnot[2, 3] = cnot[3, 2] = 1.0
for name, ch in (("swap", swap), ("cnot", unitary_channel(cnot, pair))):
    p = rob_gen_power(ch, restarts=8, seed=0)
    print(f"power({name}) = {p.value:.8f}  [{p.direction} bound from multistart]")
