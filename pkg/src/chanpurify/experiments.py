"""Parameter sweeps behind the ``sweep`` and ``distribute`` commands.

Each sweep point draws from its own RNG stream seeded by ``(seed, index)``,
so results do not depend on evaluation order.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .metrics import average_fidelity_from_probs, bell_fidelity, ppt_eigenvalues
from .purify import two_channel_purified_probs, two_channel_virtual_probs
from .qcore import (
    PauliChannel,
    bell_state,
    bit_flip_channel,
    depolarizing_channel,
    pauli_matrix,
    phase_flip_channel,
    projector,
)
from .tomography import EXACT, mle_process, mle_state, simulate_process_tomography, simulate_state_tomography

FAMILIES = {
    "depolarizing": depolarizing_channel,
    "bit_flip": bit_flip_channel,
    "phase_flip": phase_flip_channel,
}

# values reported from the photonic experiment, printed next to model output
EXPERIMENTAL_REFERENCE = {
    "bitflip_phaseflip_input_chi_II": (0.480, 0.505),
    "bitflip_phaseflip_plus_chi_II": 0.594,
    "bitflip_phaseflip_virtual_chi_II": 0.925,
    "sweep_peak_unpurified": 0.744,
    "sweep_peak_virtual": 0.913,
    "distribution_p033_purified_fidelity": 0.528,
    "distribution_p033_ppt_eigenvalues": (0.03, 0.28, 0.33, 0.36),
}


@dataclass(frozen=True)
class SweepSpec:
    family: str = "depolarizing"
    start: float = 0.2
    stop: float = 0.75
    steps: int = 23
    visibility: float = 1.0
    shots: int | None = EXACT
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown channel family {self.family!r}")
        if self.start > self.stop:
            raise ValueError("start must not exceed stop")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not 0 <= self.start <= 1 or not 0 <= self.stop <= 1:
            raise ValueError("sweep range must lie in [0, 1]")
        if not 0 <= self.visibility <= 1:
            raise ValueError("visibility must lie in [0, 1]")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be >= 1")

    def grid(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.steps)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["shots"] = "exact" if self.shots is None else self.shots
        return d


def _rng(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), int(index)])


def _branches(ch: PauliChannel, visibility: float):
    plus, minus, p_plus = two_channel_purified_probs(ch, ch, visibility)
    return plus, minus, p_plus


def _estimated_identity_weights(ch, visibility, shots, ss):
    """Tomographic estimates of chi[I, I] for input, plus and virtual channels."""
    plus, minus, p_plus = _branches(ch, visibility)
    s_in, s_plus, s_minus, s_count = ss.spawn(4)
    chi_in = mle_process(simulate_process_tomography(ch, shots, s_in))
    chi_plus = mle_process(simulate_process_tomography(plus, shots, s_plus))
    n_runs = 12 * shots
    p_hat = np.random.default_rng(s_count).binomial(n_runs, p_plus) / n_runs
    if minus is None or p_hat == 1.0:
        virt = chi_plus
    else:
        chi_minus = mle_process(simulate_process_tomography(minus, shots, s_minus))
        virt = (p_hat * chi_plus - (1 - p_hat) * chi_minus) / (2 * p_hat - 1)
    return float(np.real(chi_in[0, 0])), float(np.real(chi_plus[0, 0])), float(np.real(virt[0, 0]))


def _sweep_point(spec: SweepSpec, index: int, p: float) -> list:
    ch = FAMILIES[spec.family](float(p))
    if spec.shots is EXACT:
        plus, _, _ = _branches(ch, spec.visibility)
        w = (ch.vector()[0], plus.vector()[0], two_channel_virtual_probs(ch, ch).vector()[0])
    else:
        w = _estimated_identity_weights(ch, spec.visibility, spec.shots, _rng(spec.seed, index))
    return [float(p)] + [average_fidelity_from_probs(x) for x in w]


SWEEP_HEADER = ("p", "F_unpurified", "F_physical", "F_virtual")


def fidelity_sweep(spec: SweepSpec, workers: int = 1) -> list[list]:
    """Average fidelity with the identity for unpurified, purified and virtual channels."""
    grid = spec.grid()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda ip: _sweep_point(spec, *ip), enumerate(grid)))
    return [_sweep_point(spec, i, p) for i, p in enumerate(grid)]


def distributed_state(ch: PauliChannel) -> np.ndarray:
    """Bell state with ``ch`` acting on the second qubit only."""
    phi = projector(bell_state())
    out = np.zeros((4, 4), dtype=complex)
    for lab, p in ch.probs.items():
        if p:
            P = np.kron(np.eye(2), pauli_matrix(lab))
            out += p * P @ phi @ P
    return out


DISTRIBUTE_HEADER = ("p", "F_unpurified", "F_purified", "entangled_unpurified", "entangled_purified")


def _distribute_point(spec: SweepSpec, index: int, p: float) -> dict:
    ch = FAMILIES[spec.family](float(p))
    plus, _, _ = _branches(ch, spec.visibility)
    states = [distributed_state(ch), distributed_state(plus)]
    if spec.shots is not EXACT:
        streams = _rng(spec.seed, index).spawn(2)
        states = [mle_state(simulate_state_tomography(s, spec.shots, ss)) for s, ss in zip(states, streams)]
    fid = [bell_fidelity(s).value for s in states]
    ppt = [ppt_eigenvalues(s) for s in states]
    return {
        "row": [float(p), fid[0], fid[1], ppt[0].entangled, ppt[1].entangled],
        "ppt_unpurified": ppt[0].eigenvalues,
        "ppt_purified": ppt[1].eigenvalues,
    }


def distribution_sweep(spec: SweepSpec, workers: int = 1) -> list[dict]:
    grid = spec.grid()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda ip: _distribute_point(spec, *ip), enumerate(grid)))
    return [_distribute_point(spec, i, p) for i, p in enumerate(grid)]


def depolarizing_p_for_average_fidelity(f_avg: float) -> float:
    """Depolarizing parameter whose unpurified average fidelity is ``f_avg``."""
    p_identity = (3 * f_avg - 1) / 2
    return (p_identity - 0.25) / 0.75
