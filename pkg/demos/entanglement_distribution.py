"""
Sending half of a Bell pair through a noisy link
================================================

The second qubit of |Phi+> passes through depolarizing noise, with and
without purification of the link.
"""
import numpy as np

from chanpurify import depolarizing_channel, purified_pauli_probs
from chanpurify.experiments import distributed_state
from chanpurify.metrics import bell_fidelity, ppt_eigenvalues

for p in (0.2, 1 / 3, 0.33, 0.5):
    link = depolarizing_channel(p)
    raw = distributed_state(link)
    fixed = distributed_state(purified_pauli_probs(link))
    r, f = ppt_eigenvalues(raw), ppt_eigenvalues(fixed)
    print(f"p = {p:.4f}: F = {bell_fidelity(raw).value:.4f} ({r.verdict}) -> {bell_fidelity(fixed).value:.4f} ({f.verdict})")

# the partial-transpose spectrum of the raw state at p = 0.33
print(np.round(ppt_eigenvalues(distributed_state(depolarizing_channel(0.33))).eigenvalues, 6))
