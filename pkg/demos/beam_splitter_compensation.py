"""
Turning a real beam splitter into a path Hadamard
=================================================

A lossless 50:50 beam splitter adds polarization dependent phases. Phase
tuners (QWP-HWP-QWP) on each path and a tilt phase before it cancel them.
"""
import numpy as np

from chanpurify.optics import (
    PAULI_SETTINGS,
    PAULI_TARGETS,
    BsPhases,
    Compensation,
    global_phase_distance,
    qhq,
    solve_compensation,
    verify_spatial_hadamard,
)

# wave plate settings for the four Pauli rotations
for name, angles in PAULI_SETTINGS.items():
    print(name, angles, "distance", global_phase_distance(qhq(*angles), PAULI_TARGETS[name]))

phases = BsPhases.random(np.random.default_rng(0))
comp = solve_compensation(phases)
print(comp)
check = verify_spatial_hadamard(phases, comp)
print("Hadamard up to output phases:", check.ok, "residual", check.residual)
print("P(|+> leaves on path 0) =", check.plus_to_path0)

# without the output tuners the polarization picks up path-dependent phases,
# which do not matter once the polarization is ignored
partial = Compensation(comp.theta1, comp.theta2, 0.0, 0.0, comp.delta)
print("full check:", verify_spatial_hadamard(phases, partial).ok,
      "| path statistics only:", verify_spatial_hadamard(phases, partial, spatial_only=True).ok)
