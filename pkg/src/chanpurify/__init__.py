"""Simulation and analysis tools for two-Fredkin quantum channel purification.

Submodules:

- :mod:`chanpurify.qcore` -- states, Pauli and Kraus channels, partial trace
- :mod:`chanpurify.purify` -- circuit simulation and closed-form branches
- :mod:`chanpurify.tomography` -- chi/PTM/Choi, simulated counts, MLE
- :mod:`chanpurify.metrics` -- fidelities and the PPT test
- :mod:`chanpurify.optics` -- wave plates and beam-splitter compensation
- :mod:`chanpurify.experiments` -- fidelity and entanglement-distribution sweeps
"""
__version__ = "0.1.0"

from .qcore import (
    KrausChannel,
    PauliChannel,
    apply_kraus,
    bell_state,
    bit_flip_channel,
    compose,
    depolarizing_channel,
    is_cptp,
    maximally_mixed,
    partial_trace,
    pauli_channel_to_kraus,
    phase_flip_channel,
    tensor_product,
)
from .purify import (
    CircuitConfig,
    PurificationOutcome,
    pauli_twirl,
    purified_pauli_probs,
    simulate_purification,
    two_channel_purified_probs,
    virtual_combination,
    virtual_pauli_probs,
)
from .tomography import chi_from_channel, mle_process, mle_state, ptm_from_channel
from .metrics import average_fidelity, bell_fidelity, ppt_eigenvalues

__all__ = [
    "CircuitConfig",
    "KrausChannel",
    "PauliChannel",
    "PurificationOutcome",
    "apply_kraus",
    "average_fidelity",
    "bell_fidelity",
    "bell_state",
    "bit_flip_channel",
    "chi_from_channel",
    "compose",
    "depolarizing_channel",
    "is_cptp",
    "maximally_mixed",
    "mle_process",
    "mle_state",
    "partial_trace",
    "pauli_channel_to_kraus",
    "pauli_twirl",
    "phase_flip_channel",
    "ppt_eigenvalues",
    "ptm_from_channel",
    "purified_pauli_probs",
    "simulate_purification",
    "tensor_product",
    "two_channel_purified_probs",
    "virtual_combination",
    "virtual_pauli_probs",
]
