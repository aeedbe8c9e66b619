"""
Average fidelity of purified depolarizing channels
==================================================
"""
import numpy as np

from chanpurify.experiments import SweepSpec, fidelity_sweep

rows = np.array(fidelity_sweep(SweepSpec(start=0.2, stop=0.75, steps=12)))

print(f"{'p':>6} {'raw':>8} {'plus':>8} {'virtual':>8}")
for p, f_raw, f_plus, f_virt in rows:
    print(f"{p:6.3f} {f_raw:8.4f} {f_plus:8.4f} {f_virt:8.4f}")

# the gain from the virtual channel is largest somewhere in the middle:
# at p -> 1 there is nothing to remove and at p -> 0 nothing is left to keep
gain = rows[:, 3] - rows[:, 1]
k = np.argmax(gain)
print("largest virtual gain at p =", rows[k, 0], "->", round(gain[k], 4))

# the same sweep from finite-shot tomography of each branch
noisy = np.array(fidelity_sweep(SweepSpec(start=0.2, stop=0.75, steps=4, shots=2000, seed=1)))
print(np.round(noisy, 4))
