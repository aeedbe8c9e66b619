"""Two-Fredkin channel purification: circuit simulation and closed forms.

Register order in the simulated circuit is ``control (x) ancilla (x) main``.
The control starts in ``|+>``, the ancilla in the maximally mixed state and
the main register in the input state. The circuit is::

    Fredkin -> C1 on ancilla, C2 on main -> Fredkin -> measure control in X

after which the ancilla is discarded. Keeping the ``|+>`` outcome gives the
physically purified channel; the signed difference of the two branches gives
the virtual channel, which is only meaningful for expectation values.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import (
    DimensionError,
    KrausChannel,
    PauliChannel,
    apply_kraus,
    as_kraus,
    is_cptp,
    maximally_mixed,
    num_qubits,
    pauli_basis,
    projector,
    plus_state,
)
from .tomography import (
    chi_from_channel,
    chi_from_choi,
    choi_from_map,
    chi_to_dict,
    chi_to_pauli_channel,
)


class UndefinedCombinationError(ValueError):
    """The virtual combination needs ``p_plus != p_minus``."""


@dataclass(frozen=True)
class CircuitConfig:
    visibility: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility}")


@dataclass(frozen=True, eq=False)
class PurificationOutcome:
    """Both post-selection branches of one purification run.

    ``plus_chi``/``minus_chi`` are the normalized branch maps, ``p_plus`` and
    ``p_minus`` the outcome probabilities for the simulated input state, and
    ``virtual_chi`` the signed combination (``None`` when undefined).
    ``plus_unnormalized``/``minus_unnormalized`` keep the raw branch maps.
    """

    plus_chi: np.ndarray
    minus_chi: np.ndarray
    p_plus: float
    p_minus: float
    virtual_chi: np.ndarray | None
    plus_unnormalized: np.ndarray
    minus_unnormalized: np.ndarray
    plus_state: np.ndarray | None = None
    minus_state: np.ndarray | None = None

    def plus_channel(self) -> PauliChannel:
        return chi_to_pauli_channel(self.plus_chi)

    def minus_channel(self) -> PauliChannel:
        return chi_to_pauli_channel(self.minus_chi)

    def virtual_probs(self) -> np.ndarray:
        """Diagonal of the virtual chi matrix (may leave [0, 1])."""
        if self.virtual_chi is None:
            raise UndefinedCombinationError("virtual channel undefined: p_plus == p_minus")
        return np.real(np.diag(self.virtual_chi))

    def to_dict(self) -> dict:
        return {
            "p_plus": self.p_plus,
            "p_minus": self.p_minus,
            "plus_chi": chi_to_dict(self.plus_chi),
            "minus_chi": chi_to_dict(self.minus_chi),
            "virtual_chi": None if self.virtual_chi is None else chi_to_dict(self.virtual_chi),
        }


def swap_operator(dim: int) -> np.ndarray:
    """SWAP on two registers of dimension ``dim``."""
    s = np.zeros((dim * dim, dim * dim))
    for a in range(dim):
        for b in range(dim):
            s[b * dim + a, a * dim + b] = 1.0
    return s


def fredkin_unitary(target_dim: int = 2) -> np.ndarray:
    """Controlled-SWAP ``|0><0| (x) I + |1><1| (x) S`` on control + two registers."""
    if target_dim < 2:
        raise ValueError("target_dim must be >= 2")
    n = target_dim * target_dim
    u = np.zeros((2 * n, 2 * n), dtype=complex)
    u[:n, :n] = np.eye(n)
    u[n:, n:] = swap_operator(target_dim)
    return u


def _run_circuit(k1: KrausChannel, k2: KrausChannel, rho: np.ndarray, visibility: float):
    d = rho.shape[0]
    F = fredkin_unitary(d)
    state = np.kron(projector(plus_state()), np.kron(maximally_mixed(d), rho))
    state = F @ state @ F.conj().T
    noise = KrausChannel(tuple(np.kron(np.eye(2), np.kron(a, b)) for a in k1.ops for b in k2.ops))
    state = apply_kraus(noise, state)
    state = F @ state @ F.conj().T
    n = d * d
    blk00, blk01 = state[:n, :n], state[:n, n:]
    blk10, blk11 = state[n:, :n], state[n:, n:]
    coh = visibility * (blk01 + blk10)
    branches = []
    for sign in (1, -1):
        # <+-| state |+-> on the control, then discard the ancilla
        joint = 0.5 * (blk00 + blk11 + sign * coh)
        branches.append(np.trace(joint.reshape(d, d, d, d), axis1=0, axis2=2))
    return branches


def _check_inputs(c1, c2, d):
    for name, ch in (("c1", c1), ("c2", c2)):
        if ch.dim_in != d or ch.dim_out != d:
            raise DimensionError(f"{name} acts on dim {ch.dim_in}, input state has dim {d}")
        ok, dev = is_cptp(ch)
        if not ok:
            raise ValueError(f"{name} is not CPTP (completeness deviation {dev:.3g})")


def simulate_purification(c1, c2, rho: np.ndarray | None = None, cfg: CircuitConfig | None = None) -> PurificationOutcome:
    """Run the purification circuit exactly on density matrices.

    Branch maps are reconstructed by pushing every ``|i><j|`` through the
    circuit. Branch probabilities are evaluated on ``rho`` (maximally mixed
    by default); for Pauli-diagonal channels they do not depend on the input.

    Args:
        c1: Channel on the path that first carries the ancilla.
        c2: Channel on the path that first carries the main register.
        rho: Input state of the main register.
        cfg: Visibility damping the control coherence; ``None`` means ideal.
    """
    cfg = cfg or CircuitConfig()
    k1, k2 = as_kraus(c1), as_kraus(c2)
    d = k1.dim_in
    rho = maximally_mixed(d) if rho is None else np.asarray(rho, dtype=complex)
    if rho.shape != (d, d):
        raise DimensionError(f"input state has shape {rho.shape}, channels act on dim {d}")
    _check_inputs(k1, k2, d)
    num_qubits(d)

    cache = {}

    def branch(idx):
        def fn(m):
            key = m.tobytes()
            if key not in cache:
                cache[key] = _run_circuit(k1, k2, m, cfg.visibility)
            return cache[key][idx]
        return fn

    chi_plus = chi_from_choi(choi_from_map(branch(0), d))
    chi_minus = chi_from_choi(choi_from_map(branch(1), d))
    out_plus, out_minus = _run_circuit(k1, k2, rho, cfg.visibility)
    p_plus = float(np.real(np.trace(out_plus)))
    p_minus = float(np.real(np.trace(out_minus)))

    virtual = None
    if abs(p_plus - p_minus) > 1e-12:
        virtual = (chi_plus - chi_minus) / (p_plus - p_minus)
    return PurificationOutcome(
        plus_chi=chi_plus / p_plus if p_plus > 0 else chi_plus,
        minus_chi=chi_minus / p_minus if p_minus > 0 else chi_minus,
        p_plus=p_plus,
        p_minus=p_minus,
        virtual_chi=virtual,
        plus_unnormalized=chi_plus,
        minus_unnormalized=chi_minus,
        plus_state=out_plus / p_plus if p_plus > 0 else None,
        minus_state=out_minus / p_minus if p_minus > 0 else None,
    )


def purified_pauli_probs(p: PauliChannel) -> PauliChannel:
    """Plus-branch channel for two identical Pauli channels: ``p(1+p)/(1+sum p^2)``."""
    v = p.vector()
    return PauliChannel.from_vector(v * (1 + v) / (1 + v @ v), p.n_qubits)


def virtual_pauli_probs(p: PauliChannel) -> PauliChannel:
    """Virtual channel for two identical Pauli channels: ``p^2 / sum p^2``."""
    v = p.vector()
    return PauliChannel.from_vector(v**2 / (v @ v), p.n_qubits)


def two_channel_purified_probs(q: PauliChannel, r: PauliChannel, visibility: float = 1.0):
    """Closed-form branches for two (possibly different) Pauli channels.

    The plus branch is proportional to ``q + r + 2 V q r`` and the minus branch
    to ``q + r - 2 V q r``, with ``p_plus = (1 + V sum q r)/2``.

    Returns:
        ``(plus, minus, p_plus)``; ``minus`` is ``None`` when ``p_plus == 1``.
    """
    if q.n_qubits != r.n_qubits:
        raise DimensionError("channels act on different numbers of qubits")
    a, b = q.vector(), r.vector()
    overlap = visibility * (a @ b)
    p_plus = (1 + overlap) / 2
    plus = PauliChannel.from_vector((a + b + 2 * visibility * a * b) / (2 + 2 * overlap), q.n_qubits)
    minus = None
    if 1 - overlap > 1e-15:
        minus = PauliChannel.from_vector((a + b - 2 * visibility * a * b) / (2 - 2 * overlap), q.n_qubits)
    return plus, minus, float(p_plus)


def two_channel_virtual_probs(q: PauliChannel, r: PauliChannel) -> PauliChannel:
    """Virtual channel for two Pauli channels: ``q r / sum q r``."""
    a, b = q.vector(), r.vector()
    if a @ b == 0:
        raise UndefinedCombinationError("channels have no common Pauli component")
    return PauliChannel.from_vector(a * b / (a @ b), q.n_qubits)


def virtual_combination(outcome: PurificationOutcome) -> np.ndarray:
    """``(p+ C+ - p- C-) / (p+ - p-)`` as a chi matrix.

    The result is linear and trace preserving but need not be completely
    positive.
    """
    gap = outcome.p_plus - outcome.p_minus
    if abs(gap) <= 1e-12:
        raise UndefinedCombinationError("virtual channel undefined: p_plus == p_minus")
    return (outcome.p_plus * outcome.plus_chi - outcome.p_minus * outcome.minus_chi) / gap


def pauli_twirl(ch) -> PauliChannel:
    """Average of ``P C(P rho P) P`` over all Pauli strings ``P``."""
    k = as_kraus(ch)
    if k.dim_in != k.dim_out:
        raise DimensionError("twirling needs a square channel")
    n = num_qubits(k.dim_in)
    basis = pauli_basis(n)
    w = 1 / np.sqrt(len(basis))
    twirled = KrausChannel(tuple(w * P.conj().T @ K @ P for P in basis for K in k.ops))
    chi = chi_from_channel(twirled)
    probs = np.clip(np.real(np.diag(chi)), 0.0, None)
    return PauliChannel.from_vector(probs / probs.sum(), n)


def map_bell_control_outcomes(outcome_pair) -> str:
    """Branch label for a pair of X outcomes on a Bell-state control register.

    ``(+, +)`` and ``(-, -)`` select the plus branch; mixed signs the minus branch.
    """
    a, b = (str(s) for s in outcome_pair)
    for s in (a, b):
        if s not in ("+", "-"):
            raise ValueError(f"outcome sign must be '+' or '-', got {s!r}")
    return "plus" if a == b else "minus"


def branch_pauli_probs(outcome: PurificationOutcome) -> tuple[np.ndarray, np.ndarray]:
    return np.real(np.diag(outcome.plus_chi)), np.real(np.diag(outcome.minus_chi))


def closed_form_residual(outcome: PurificationOutcome, q: PauliChannel, r: PauliChannel, visibility: float = 1.0) -> float:
    """Max deviation between circuit branches and the closed forms.

    The virtual part is divided by ``p_plus - p_minus``, so round-off in it
    grows like ``1 / (visibility * sum(q r))``.
    """
    plus, minus, p_plus = two_channel_purified_probs(q, r, visibility)
    res = [abs(outcome.p_plus - p_plus), np.max(np.abs(outcome.plus_chi - np.diag(plus.vector())))]
    if minus is not None:
        res.append(np.max(np.abs(outcome.minus_chi - np.diag(minus.vector()))))
    if outcome.virtual_chi is not None:
        virt = two_channel_virtual_probs(q, r)
        res.append(np.max(np.abs(outcome.virtual_chi - np.diag(virt.vector()))))
    return float(max(res))


__all__ = [
    "CircuitConfig",
    "PurificationOutcome",
    "UndefinedCombinationError",
    "branch_pauli_probs",
    "closed_form_residual",
    "fredkin_unitary",
    "map_bell_control_outcomes",
    "pauli_twirl",
    "purified_pauli_probs",
    "simulate_purification",
    "swap_operator",
    "two_channel_purified_probs",
    "two_channel_virtual_probs",
    "virtual_combination",
    "virtual_pauli_probs",
]
