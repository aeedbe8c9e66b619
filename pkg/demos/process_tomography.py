"""
Twelve-setting process tomography with maximum likelihood
=========================================================
"""
import numpy as np

from chanpurify import depolarizing_channel
from chanpurify.tomography import EXACT, chi_from_channel, mle_process, simulate_process_tomography

ch = depolarizing_channel(0.5)
truth = chi_from_channel(ch)

# exact probabilities separate algorithmic error from shot noise
chi = mle_process(simulate_process_tomography(ch, EXACT))
print("exact input, max error:", np.max(np.abs(chi - truth)))

for shots in (100, 1000, 10_000, 100_000):
    chi, info = mle_process(simulate_process_tomography(ch, shots, seed=3), full_output=True)
    print(f"{shots:>7} shots: chi(I,I) = {chi[0, 0].real:.4f}, max error {np.max(np.abs(chi - truth)):.4f}, "
          f"{info.iterations} iterations")
