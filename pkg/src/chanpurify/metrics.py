"""Fidelities, partial transpose and the two-qubit PPT test."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .qcore import DimensionError, bell_state

ENTANGLEMENT_TOL = 1e-9


@dataclass(frozen=True)
class FidelityReport:
    value: float
    kind: str
    target: str
    flags: tuple[str, ...] = field(default_factory=tuple)

    def __float__(self):
        return float(self.value)

    def to_dict(self) -> dict:
        return {"value": self.value, "kind": self.kind, "target": self.target, "flags": list(self.flags)}


def _flags(value: float, virtual: bool) -> tuple[str, ...]:
    flags = []
    if virtual:
        flags.append("virtual")
    if not -1e-12 <= value <= 1 + 1e-12:
        flags.append("out-of-range")
    return tuple(flags)


def bell_fidelity(rho: np.ndarray) -> FidelityReport:
    """Overlap ``<Phi+| rho |Phi+>`` with the Bell state."""
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise DimensionError(f"bell_fidelity needs a two-qubit state, got shape {rho.shape}")
    phi = bell_state()
    value = float(np.real(phi.conj() @ rho @ phi))
    return FidelityReport(value, "state-overlap", "Phi+", _flags(value, False))


def process_fidelity_to_identity(chi: np.ndarray, virtual: bool = False) -> FidelityReport:
    """Process fidelity with the identity channel, i.e. ``Re chi[I, I]``."""
    value = float(np.real(np.asarray(chi)[0, 0]))
    return FidelityReport(value, "process", "identity", _flags(value, virtual))


def average_fidelity(chi: np.ndarray, dim: int = 2, virtual: bool = False) -> FidelityReport:
    """Haar-averaged fidelity with the identity, ``(d F_pro + 1)/(d + 1)``."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    f_pro = float(np.real(np.asarray(chi)[0, 0]))
    value = (dim * f_pro + 1) / (dim + 1)
    return FidelityReport(value, "average", "identity", _flags(value, virtual))


def average_fidelity_from_probs(p_identity: float, dim: int = 2) -> float:
    return (dim * p_identity + 1) / (dim + 1)


def partial_transpose(rho: np.ndarray, dims: Sequence[int] = (2, 2), transposed: int = 1) -> np.ndarray:
    """Transpose subsystem ``transposed`` of a multipartite operator."""
    rho = np.asarray(rho)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionError(f"operator shape {rho.shape} does not match dims {dims}")
    n = len(dims)
    if not 0 <= transposed < n:
        raise ValueError(f"subsystem index {transposed} out of range")
    t = rho.reshape(dims + dims)
    axes = list(range(2 * n))
    axes[transposed], axes[transposed + n] = axes[transposed + n], axes[transposed]
    return t.transpose(axes).reshape(total, total)


class PPTResult(NamedTuple):
    eigenvalues: np.ndarray
    entangled: bool
    verdict: str


def ppt_eigenvalues(rho: np.ndarray, tol: float = ENTANGLEMENT_TOL) -> PPTResult:
    """Ascending spectrum of the partial transpose of a two-qubit state.

    ``verdict`` is ``"entangled"``, ``"separable"`` or, when the smallest
    eigenvalue lies within ``tol`` of zero, ``"indeterminate"``.
    """
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise DimensionError(f"PPT test is implemented for two qubits, got shape {rho.shape}")
    pt = partial_transpose(rho, (2, 2), 1)
    w = np.sort(np.linalg.eigvalsh((pt + pt.conj().T) / 2))
    lo = w[0]
    if lo < -tol:
        verdict = "entangled"
    elif lo <= tol:
        verdict = "indeterminate"
    else:
        verdict = "separable"
    return PPTResult(w, bool(lo < -tol), verdict)
