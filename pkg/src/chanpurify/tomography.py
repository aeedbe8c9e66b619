"""Process representations, simulated measurement counts and MLE tomography.

Chi convention: a map is written ``C(rho) = sum_ab chi[a, b] P_a rho P_b``
with *unnormalized* Pauli strings, so a trace-preserving map has
``trace(chi) == 1`` and a Pauli channel has ``diag(chi) == probs``.

Choi convention: ``choi = sum_ij C(|i><j|) (x) |i><j|`` (output factor first).
Then ``C(rho) = tr_in[choi (I (x) rho^T)]`` and trace preservation means
``tr_out(choi) == I``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from ._io import fmt_float
from .qcore import (
    DimensionError,
    KrausChannel,
    PauliChannel,
    apply_kraus,
    as_kraus,
    num_qubits,
    partial_trace,
    pauli_basis,
    pauli_labels,
    pauli_matrix,
    projector,
)

EXACT = None
"""Shot-count sentinel meaning "use Born probabilities, no sampling"."""

PREPARATIONS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "+i": np.array([1, 1j], dtype=complex) / np.sqrt(2),
}
BASES = ("X", "Y", "Z")


class ReconstructionUnderdetermined(ValueError):
    """Records are not informationally complete for the requested estimate."""


# --------------------------------------------------------------------------
# Representations
# --------------------------------------------------------------------------

def _pauli_vec_matrix(n: int) -> np.ndarray:
    # columns are row-major vec(P_a)
    basis = pauli_basis(n)
    return basis.reshape(len(basis), -1).T


def choi_from_map(fn: Callable[[np.ndarray], np.ndarray], dim: int) -> np.ndarray:
    """Choi matrix of an arbitrary linear map given as a callable."""
    d_out = None
    blocks = {}
    for i in range(dim):
        for j in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = 1.0
            blocks[i, j] = np.asarray(fn(e), dtype=complex)
            d_out = blocks[i, j].shape[0]
    choi = np.zeros((d_out * dim, d_out * dim), dtype=complex)
    for (i, j), b in blocks.items():
        e = np.zeros((dim, dim))
        e[i, j] = 1.0
        choi += np.kron(b, e)
    return choi


def choi_from_channel(ch: KrausChannel | PauliChannel) -> np.ndarray:
    ch = as_kraus(ch)
    vecs = np.array([k.reshape(-1) for k in ch.ops])
    return vecs.T @ vecs.conj()


def apply_choi(choi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    d_in = rho.shape[0]
    d_out = choi.shape[0] // d_in
    return partial_trace(choi @ np.kron(np.eye(d_out), rho.T), [d_out, d_in], keep=0)


def channel_from_choi(choi: np.ndarray, tol: float = 1e-12) -> KrausChannel:
    """Kraus form of a square-dimension Choi matrix (must be PSD)."""
    choi = (np.asarray(choi) + np.asarray(choi).conj().T) / 2
    d = int(round(math.sqrt(choi.shape[0])))
    w, v = np.linalg.eigh(choi)
    if w.min() < -1e-9 * max(1.0, w.max()):
        raise ValueError(f"Choi matrix is not PSD (min eigenvalue {w.min():.3g})")
    ops = [np.sqrt(lam) * v[:, k].reshape(d, d) for k, lam in enumerate(w) if lam > tol]
    return KrausChannel(tuple(ops))


def chi_from_choi(choi: np.ndarray) -> np.ndarray:
    d = int(round(math.sqrt(np.asarray(choi).shape[0])))
    V = _pauli_vec_matrix(num_qubits(d))
    return V.conj().T @ choi @ V / d**2


def choi_from_chi(chi: np.ndarray) -> np.ndarray:
    n = num_qubits(int(round(math.sqrt(np.asarray(chi).shape[0]))))
    V = _pauli_vec_matrix(n)
    return V @ chi @ V.conj().T


def chi_from_channel(ch: KrausChannel | PauliChannel) -> np.ndarray:
    """Chi matrix in the Pauli basis (see module docstring)."""
    if isinstance(ch, PauliChannel):
        return np.diag(ch.vector()).astype(complex)
    d = ch.dim_in
    if ch.dim_out != d:
        raise DimensionError("chi matrices need square channels")
    n = num_qubits(d)
    basis = pauli_basis(n)
    # K = sum_a c_a P_a with c_a = tr(P_a K)/d
    coeffs = np.einsum("aji,kij->ka", basis, np.array(ch.ops)) / d
    return coeffs.T @ coeffs.conj()


def chi_from_map(fn: Callable[[np.ndarray], np.ndarray], dim: int) -> np.ndarray:
    return chi_from_choi(choi_from_map(fn, dim))


def apply_chi(chi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    basis = pauli_basis(num_qubits(rho.shape[0]))
    return np.einsum("ab,aij,jk,blk->il", chi, basis, rho, basis.conj())


def channel_from_chi(chi: np.ndarray, tol: float = 1e-12) -> KrausChannel:
    """Kraus form of a PSD chi matrix via its eigendecomposition."""
    chi = (np.asarray(chi) + np.asarray(chi).conj().T) / 2
    n = num_qubits(int(round(math.sqrt(chi.shape[0]))))
    basis = pauli_basis(n)
    w, v = np.linalg.eigh(chi)
    if w.min() < -1e-9 * max(1.0, w.max()):
        raise ValueError(f"chi matrix is not PSD (min eigenvalue {w.min():.3g})")
    ops = [np.sqrt(lam) * np.einsum("a,aij->ij", v[:, k], basis) for k, lam in enumerate(w) if lam > tol]
    return KrausChannel(tuple(ops))


def ptm_from_map(fn: Callable[[np.ndarray], np.ndarray], dim: int) -> np.ndarray:
    basis = pauli_basis(num_qubits(dim))
    outs = np.array([fn(p) for p in basis])
    return np.real(np.einsum("aij,bji->ab", basis, outs)) / dim


def ptm_from_channel(ch: KrausChannel | PauliChannel) -> np.ndarray:
    """Pauli transfer matrix ``R[a, b] = tr(P_a C(P_b)) / d``."""
    ch = as_kraus(ch)
    return ptm_from_map(lambda m: apply_kraus(ch, m), ch.dim_in)


def apply_ptm(ptm: np.ndarray, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    basis = pauli_basis(num_qubits(d))
    coords = np.einsum("aij,ji->a", basis, rho) / d
    return np.einsum("a,aij->ij", ptm @ coords, basis)


def chi_to_pauli_channel(chi: np.ndarray) -> PauliChannel:
    """Diagonal of ``chi`` as a Pauli channel (off-diagonals dropped)."""
    p = np.real(np.diag(chi))
    p = np.clip(p, 0.0, None)
    return PauliChannel.from_vector(p / p.sum())


# --------------------------------------------------------------------------
# Measurement records
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasurementSetting:
    """A preparation (``None`` for state tomography) and a Pauli basis per qubit."""

    preparation: str | None
    basis: str

    def __post_init__(self):
        if self.preparation is not None and any(p not in PREPARATIONS for p in _split_prep(self.preparation)):
            raise ValueError(f"unknown preparation {self.preparation!r}")
        if not self.basis or any(b not in BASES for b in self.basis):
            raise ValueError(f"unknown measurement basis {self.basis!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.basis)

    def input_state(self) -> np.ndarray:
        if self.preparation is None:
            raise ValueError("state-tomography setting has no preparation")
        psi = np.array([1.0 + 0j])
        for p in _split_prep(self.preparation):
            psi = np.kron(psi, PREPARATIONS[p])
        return projector(psi)

    def projectors(self) -> dict[str, np.ndarray]:
        """Outcome bitstring -> projector; bit 0 is the +1 eigenvalue."""
        out = {}
        for bits in itertools.product("01", repeat=self.n_qubits):
            op = np.array([[1.0 + 0j]])
            for b, axis in zip(bits, self.basis):
                sign = 1 if b == "0" else -1
                op = np.kron(op, (np.eye(2) + sign * pauli_matrix(axis)) / 2)
            out["".join(bits)] = op
        return out


def _split_prep(prep: str) -> list[str]:
    # multi-qubit preparations are comma separated, e.g. "0,+i"
    return prep.split(",")


@dataclass(frozen=True)
class CountRecord:
    """Outcome counts for one setting. With ``shots=EXACT`` counts are probabilities."""

    setting: MeasurementSetting
    counts: Mapping[str, float]
    shots: int | None

    def __post_init__(self):
        if self.shots is not None:
            if any(c < 0 for c in self.counts.values()):
                raise ValueError("counts must be non-negative")
            if sum(self.counts.values()) != self.shots:
                raise ValueError("counts do not sum to shots")

    def frequencies(self) -> dict[str, float]:
        total = float(sum(self.counts.values()))
        return {k: v / total for k, v in self.counts.items()}

    def to_dict(self) -> dict:
        return {
            "prep": self.setting.preparation,
            "basis": self.setting.basis,
            "counts": dict(self.counts),
            "shots": self.shots,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "CountRecord":
        return cls(MeasurementSetting(doc.get("prep"), doc["basis"]), dict(doc["counts"]), doc.get("shots"))


def born_probabilities(rho: np.ndarray, setting: MeasurementSetting) -> dict[str, float]:
    probs = {k: float(np.real(np.trace(p @ rho))) for k, p in setting.projectors().items()}
    clipped = {k: max(v, 0.0) for k, v in probs.items()}
    total = sum(clipped.values())
    return {k: v / total for k, v in clipped.items()}


def sample_counts(rho: np.ndarray, setting: MeasurementSetting, shots: int | None, seed=None) -> CountRecord:
    """Draw ``shots`` outcomes from the Born distribution of ``setting``.

    ``seed`` may be an int, a :class:`numpy.random.SeedSequence` or a
    :class:`numpy.random.Generator`. With ``shots=EXACT`` the record carries
    the probabilities themselves.
    """
    probs = born_probabilities(rho, setting)
    if shots is EXACT:
        return CountRecord(setting, probs, EXACT)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    keys = sorted(probs)
    draws = rng.multinomial(int(shots), [probs[k] for k in keys])
    return CountRecord(setting, {k: int(n) for k, n in zip(keys, draws)}, int(shots))


def process_frame(n_qubits: int = 1) -> list[MeasurementSetting]:
    """Preparations {0, 1, +, +i} x bases {X, Y, Z} (12 settings for one qubit)."""
    preps = [",".join(p) for p in itertools.product(PREPARATIONS, repeat=n_qubits)]
    bases = ["".join(b) for b in itertools.product(BASES, repeat=n_qubits)]
    return [MeasurementSetting(p, b) for p in preps for b in bases]


def state_frame(n_qubits: int) -> list[MeasurementSetting]:
    return [MeasurementSetting(None, "".join(b)) for b in itertools.product(BASES, repeat=n_qubits)]


def _seed_sequence(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def simulate_state_tomography(rho: np.ndarray, shots: int | None, seed=None) -> list[CountRecord]:
    n = num_qubits(np.asarray(rho).shape[0])
    streams = _seed_sequence(seed).spawn(3**n)
    return [sample_counts(rho, s, shots, np.random.default_rng(ss)) for s, ss in zip(state_frame(n), streams)]


def simulate_process_tomography(ch: KrausChannel | PauliChannel, shots_per_setting: int | None, seed=None) -> list[CountRecord]:
    """Counts for every setting of :func:`process_frame` on a channel."""
    ch = as_kraus(ch)
    n = num_qubits(ch.dim_in)
    frame = process_frame(n)
    streams = _seed_sequence(seed).spawn(len(frame))
    records = []
    for setting, ss in zip(frame, streams):
        out = apply_kraus(ch, setting.input_state())
        records.append(sample_counts(out, setting, shots_per_setting, np.random.default_rng(ss)))
    return records


# --------------------------------------------------------------------------
# Maximum likelihood
# --------------------------------------------------------------------------

@dataclass
class MLEInfo:
    loglik: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    dilutions: int = 0


def _events(records: Iterable[CountRecord], process: bool):
    ops, weights = [], []
    for rec in records:
        freqs = rec.frequencies()
        projs = rec.setting.projectors()
        prep = rec.setting.input_state().T if process else None
        for outcome, f in freqs.items():
            op = projs[outcome]
            ops.append(np.kron(op, prep) if process else op)
            weights.append(f)
    ops = np.array(ops)
    freqs = np.array(weights, dtype=float)
    return ops, freqs / freqs.sum(), freqs


# weight of the maximally mixed component blended into the starting point;
# keeps every eigenvalue positive so the multiplicative updates can move it
_START_MIXING = 1e-9


def _starting_point(ops: np.ndarray, freqs: np.ndarray, trace: float) -> np.ndarray:
    """Linear-inversion estimate clipped to PSD, then blended with the identity."""
    D = ops.shape[1]
    design = np.transpose(ops, (0, 2, 1)).reshape(len(ops), -1)
    x = np.linalg.lstsq(design, freqs.astype(complex), rcond=None)[0].reshape(D, D)
    w, v = np.linalg.eigh((x + x.conj().T) / 2)
    w = np.clip(w, 0, None)
    if w.sum() <= 0:
        return np.eye(D, dtype=complex) * trace / D
    est = (v * w) @ v.conj().T
    est *= trace / w.sum()
    return (1 - _START_MIXING) * est + _START_MIXING * trace / D * np.eye(D)


def _check_complete(ops: np.ndarray, target_dim: int) -> None:
    rank = np.linalg.matrix_rank(ops.reshape(len(ops), -1), tol=1e-9)
    if rank < target_dim**2:
        raise ReconstructionUnderdetermined(
            f"measurement operators span {rank} of {target_dim**2} dimensions"
        )


def _loglik(weights: np.ndarray, probs: np.ndarray) -> float:
    mask = weights > 0
    if np.any(probs[mask] <= 0):
        return -np.inf
    return float(np.sum(weights[mask] * np.log(probs[mask])))


def _probs(ops: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("kij,ji->k", ops, rho))


def _r_operator(ops, weights, probs):
    ratio = np.divide(weights, probs, out=np.zeros_like(weights), where=probs > 0)
    return np.einsum("k,kij->ij", ratio, ops)


def mle_state(records: Sequence[CountRecord], max_iter: int = 10_000, tol: float = 1e-10, step_tol: float = 1e-10,
              full_output: bool = False):
    """Maximum-likelihood density matrix from Pauli-basis counts.

    Starts from the linear-inversion estimate clipped to the PSD cone and
    blended with a tiny identity component, then runs the iterative
    ``R rho R`` fixed point. When a full step would lower
    the likelihood, the step is diluted, ``(I + eps R) rho (I + eps R)``, with
    ``eps`` halved until the likelihood does not decrease. Iteration stops
    once both the likelihood gain drops below ``tol`` and no matrix element
    moves by more than ``step_tol``, or when no step can raise the likelihood
    any further.

    Returns:
        The estimate, or ``(estimate, MLEInfo)`` when ``full_output`` is set.
    """
    ops, weights, freqs = _events(records, process=False)
    d = ops.shape[1]
    _check_complete(ops, d)
    rho = _starting_point(ops, freqs, 1.0)
    info = MLEInfo(loglik=[_loglik(weights, _probs(ops, rho))])
    eye = np.eye(d)
    for it in range(1, max_iter + 1):
        R = _r_operator(ops, weights, _probs(ops, rho))
        new, new_ll = _step(lambda A: A @ rho @ A.conj().T, R, eye, ops, weights, info)
        gain = new_ll - info.loglik[-1]
        if gain < 0:
            info.converged = True
            break
        change = float(np.max(np.abs(new - rho)))
        rho = new
        info.loglik.append(new_ll)
        info.iterations = it
        if gain < tol and change < step_tol:
            info.converged = True
            break
    rho = (rho + rho.conj().T) / 2
    rho = rho / np.trace(rho).real
    return (rho, info) if full_output else rho


def _step(transform, R, eye, ops, weights, info, normalize=None):
    # full R-step first, then diluted steps (I + eps R)/(1 + eps) for eps = 1, 1/2, ...
    best = None
    eps = np.inf
    while True:
        A = R if np.isinf(eps) else (eye + eps * R) / (1 + eps)
        cand = transform(A)
        cand = normalize(cand) if normalize else cand / np.trace(cand).real
        ll = _loglik(weights, _probs(ops, cand))
        if ll >= info.loglik[-1]:
            return cand, ll
        if best is None or ll > best[1]:
            best = (cand, ll)
        eps = 1.0 if np.isinf(eps) else eps / 2
        info.dilutions += 1
        if eps < 1e-14:
            return best


def mle_process(records: Sequence[CountRecord], max_iter: int = 10_000, tol: float = 1e-10, step_tol: float = 1e-10,
                full_output: bool = False):
    """Maximum-likelihood chi matrix from prepare-and-measure counts.

    The Choi matrix is updated as ``L^-1 K choi K L^-1`` where ``K`` is the
    likelihood gradient operator and ``L = (tr_out K choi K)^(1/2)`` acts on
    the input factor; this keeps every iterate exactly trace preserving.
    The starting point is the clipped linear-inversion estimate, as in
    :func:`mle_state`.
    Steps that would lower the likelihood are diluted as in :func:`mle_state`.

    Returns:
        The chi matrix, or ``(chi, MLEInfo)`` when ``full_output`` is set.
    """
    ops, weights, freqs = _events(records, process=True)
    D = ops.shape[1]
    d = int(round(math.sqrt(D)))
    _check_complete(ops, D)
    eye = np.eye(D)

    def tp_normalize(m):
        m = (m + m.conj().T) / 2
        lam = partial_trace(m, [d, d], keep=1)
        w, v = np.linalg.eigh((lam + lam.conj().T) / 2)
        inv_sqrt = (v / np.sqrt(np.clip(w, 1e-300, None))) @ v.conj().T
        L = np.kron(np.eye(d), inv_sqrt)
        return L @ m @ L

    choi = tp_normalize(_starting_point(ops, freqs, float(d)))
    info = MLEInfo(loglik=[_loglik(weights, _probs(ops, choi))])
    for it in range(1, max_iter + 1):
        K = _r_operator(ops, weights, _probs(ops, choi))
        new, new_ll = _step(lambda A: A @ choi @ A.conj().T, K, eye, ops, weights, info, tp_normalize)
        gain = new_ll - info.loglik[-1]
        if gain < 0:
            info.converged = True
            break
        change = float(np.max(np.abs(new - choi)))
        choi = new
        info.loglik.append(new_ll)
        info.iterations = it
        if gain < tol and change < step_tol:
            info.converged = True
            break
    chi = chi_from_choi(choi)
    chi = (chi + chi.conj().T) / 2
    return (chi, info) if full_output else chi


def chi_to_dict(chi: np.ndarray) -> dict:
    """JSON-ready chi matrix: basis labels and row-major ``[re, im]`` entries."""
    chi = np.asarray(chi)
    n = num_qubits(int(round(math.sqrt(chi.shape[0]))))
    return {
        "basis": list(pauli_labels(n)),
        "entries": [[float(z.real), float(z.imag)] for z in chi.reshape(-1)],
    }


def chi_from_dict(doc: Mapping) -> np.ndarray:
    arr = np.asarray(doc["entries"], dtype=float)
    m = int(round(math.sqrt(arr.shape[0])))
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(m, m)


def records_to_jsonl(records: Iterable[CountRecord]) -> str:
    """One JSON object per line: ``{"prep", "basis", "counts", "shots"}``."""
    lines = []
    for rec in records:
        counts = ", ".join(
            f'"{k}": {v if isinstance(v, (int, np.integer)) else fmt_float(v)}' for k, v in sorted(rec.counts.items())
        )
        prep = "null" if rec.setting.preparation is None else f'"{rec.setting.preparation}"'
        shots = "null" if rec.shots is None else str(int(rec.shots))
        lines.append(f'{{"prep": {prep}, "basis": "{rec.setting.basis}", "counts": {{{counts}}}, "shots": {shots}}}')
    return "\n".join(lines) + "\n"


def records_from_jsonl(text: str) -> list[CountRecord]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            out.append(CountRecord.from_dict(json.loads(line)))
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {lineno} column {exc.colno}: {exc.msg}") from exc
        except (KeyError, TypeError) as exc:
            raise ValueError(f"line {lineno}: malformed count record ({exc})") from exc
    return out
