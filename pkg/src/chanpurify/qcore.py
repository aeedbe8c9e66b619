"""Dense linear algebra, states and channels on small qubit registers.

Conventions used across the package:

* Basis ordering is big-endian: in ``|q0 q1 ...>`` the leftmost qubit is the
  most significant bit of the basis index.
* Pauli matrices are the standard ``X``, ``Y = [[0, -i], [i, 0]]`` and
  ``Z = diag(1, -1)``. Multi-qubit Pauli strings are written as labels such
  as ``"IX"`` and enumerated lexicographically over ``I, X, Y, Z``.
* Density matrices and operators are plain :class:`numpy.ndarray` objects.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
CPTP_TOL = 1e-9
SPEC_SUM_TOL = 1e-6

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_1Q = {"I": I2, "X": X, "Y": Y, "Z": Z}


class DimensionError(ValueError):
    """Operands have incompatible dimensions."""


class ChannelSpecError(ValueError):
    """A channel specification document is malformed or invalid."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def num_qubits(dim: int) -> int:
    """Return ``n`` such that ``dim == 2**n`` or raise :class:`DimensionError`."""
    n = int(round(math.log2(dim))) if dim > 0 else -1
    if n < 0 or 2**n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


# --------------------------------------------------------------------------
# Pauli strings
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def pauli_labels(n_qubits: int) -> tuple[str, ...]:
    """All ``4**n`` Pauli labels in lexicographic ``I, X, Y, Z`` order."""
    return tuple("".join(t) for t in itertools.product("IXYZ", repeat=n_qubits))


def pauli_matrix(label: str) -> np.ndarray:
    """Matrix of a Pauli string such as ``"XZ"``."""
    if not label or any(c not in PAULI_1Q for c in label):
        raise ValueError(f"invalid Pauli label {label!r}")
    out = np.array([[1.0 + 0j]])
    for c in label:
        out = np.kron(out, PAULI_1Q[c])
    return out


@lru_cache(maxsize=None)
def _pauli_basis(n_qubits: int) -> np.ndarray:
    basis = np.array([pauli_matrix(lab) for lab in pauli_labels(n_qubits)])
    basis.setflags(write=False)
    return basis


def pauli_basis(n_qubits: int) -> np.ndarray:
    """Stack of Pauli matrices, shape ``(4**n, 2**n, 2**n)``, label order."""
    return _pauli_basis(n_qubits)


# --------------------------------------------------------------------------
# Basic operations
# --------------------------------------------------------------------------

def tensor_product(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of matrices or vectors."""
    if not ops:
        raise ValueError("need at least one operand")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int] | int) -> np.ndarray:
    """Reduced operator on the subsystems listed in ``keep``.

    Args:
        rho: Operator on the joint space, shape ``(D, D)``.
        dims: Subsystem dimensions; their product must equal ``D``.
        keep: Index or indices of the subsystems to retain (in ``dims`` order).

    Returns:
        The reduced operator on the kept subsystems, kept in their original
        relative order.
    """
    rho = np.asarray(rho, dtype=complex)
    dims = [int(d) for d in dims]
    if isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = sorted(set(int(k) for k in keep))
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionError(f"operator shape {rho.shape} does not match dims {dims}")
    if not keep:
        raise ValueError("keep must be non-empty")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} subsystems")

    n = len(dims)
    t = rho.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # trace the highest index first so earlier axis numbers stay valid
    for count, i in enumerate(sorted(traced, reverse=True)):
        m = n - count
        t = np.trace(t, axis1=i, axis2=i + m)
    d_keep = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d_keep, d_keep)


def ket(bits: str) -> np.ndarray:
    """Computational-basis ket from a bitstring, e.g. ``ket("01")``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def plus_state() -> np.ndarray:
    return np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)


def minus_state() -> np.ndarray:
    return np.array([1.0, -1.0], dtype=complex) / np.sqrt(2)


def bell_state() -> np.ndarray:
    """The Bell state ``(|00> + |11>)/sqrt(2)`` as a state vector."""
    return np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2)


def maximally_mixed(dim: int) -> np.ndarray:
    if dim < 2:
        raise ValueError("dim must be at least 2")
    return np.eye(dim, dtype=complex) / dim


def check_density(rho: np.ndarray, tol: float = HERMITIAN_TOL, psd_tol: float = PSD_TOL) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit trace and PSD."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density matrix must be square, got {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol:
        raise ValueError(f"not Hermitian (deviation {herm:.3g})")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise ValueError(f"trace is {tr.real:.12g}, expected 1")
    lo = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if lo < -psd_tol:
        raise ValueError(f"not positive semidefinite (min eigenvalue {lo:.3g})")


def is_density(rho: np.ndarray, tol: float = HERMITIAN_TOL, psd_tol: float = PSD_TOL) -> bool:
    try:
        check_density(rho, tol, psd_tol)
    except ValueError:
        return False
    return True


def normalize_density(rho: np.ndarray, clamp_tol: float = PSD_TOL) -> np.ndarray:
    """Hermitize, clamp tiny negative eigenvalues to zero and renormalize.

    Eigenvalues below ``-clamp_tol`` are a genuine error, not rounding noise,
    and raise ``ValueError``.
    """
    rho = np.asarray(rho, dtype=complex)
    rho = (rho + rho.conj().T) / 2
    w, v = np.linalg.eigh(rho)
    if w.min() < -clamp_tol:
        raise ValueError(f"eigenvalue {w.min():.3g} is below clamping tolerance")
    w = np.clip(w, 0.0, None)
    rho = (v * w) @ v.conj().T
    return rho / np.trace(rho).real


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


# --------------------------------------------------------------------------
# Channels
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A linear map ``rho -> sum_k K rho K^dagger`` given by Kraus operators."""

    ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(_freeze(k) for k in self.ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ops):
            raise DimensionError("Kraus operators must be matrices of equal shape")
        object.__setattr__(self, "ops", ops)

    @property
    def dim_in(self) -> int:
        return self.ops[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.ops[0].shape[0]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply_kraus(self, rho)

    def __repr__(self):
        return f"KrausChannel(rank={len(self.ops)}, dim_in={self.dim_in}, dim_out={self.dim_out})"

    @classmethod
    def identity(cls, dim: int = 2) -> "KrausChannel":
        return cls((np.eye(dim),))

    @classmethod
    def unitary(cls, u: np.ndarray) -> "KrausChannel":
        return cls((np.asarray(u),))


def apply_kraus(ch: KrausChannel, rho: np.ndarray) -> np.ndarray:
    """Apply a Kraus channel to an operator."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ch.dim_in, ch.dim_in):
        raise DimensionError(f"channel expects dim {ch.dim_in}, got operator of shape {rho.shape}")
    ks = np.array(ch.ops)
    return np.einsum("kij,jl,kml->im", ks, rho, ks.conj())


def is_cptp(ch: KrausChannel, tol: float = CPTP_TOL) -> tuple[bool, float]:
    """Check the completeness relation.

    Returns:
        ``(ok, deviation)`` where ``deviation`` is the max-norm of
        ``sum K^dagger K - I``.
    """
    ks = np.array(ch.ops)
    s = np.einsum("kji,kjl->il", ks.conj(), ks)
    dev = float(np.max(np.abs(s - np.eye(ch.dim_in))))
    return dev <= tol, dev


def compose(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    """The channel ``a o b``: apply ``b`` first, then ``a``."""
    if a.dim_in != b.dim_out:
        raise DimensionError(f"cannot compose: {a.dim_in} != {b.dim_out}")
    return KrausChannel(tuple(ka @ kb for ka in a.ops for kb in b.ops))


def tensor_channels(*chans: KrausChannel) -> KrausChannel:
    """Parallel composition ``C1 (x) C2 (x) ...``."""
    ops = [np.array([[1.0 + 0j]])]
    for ch in chans:
        ops = [np.kron(a, k) for a in ops for k in ch.ops]
    return KrausChannel(tuple(ops))


@dataclass(frozen=True, eq=False)
class PauliChannel:
    """A Pauli-diagonal channel ``rho -> sum_a p_a P_a rho P_a``.

    ``probs`` maps Pauli labels (``"I"``, ``"XZ"``, ...) to probabilities;
    labels that are absent have probability zero.
    """

    n_qubits: int
    probs: Mapping[str, float]

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        labels = set(pauli_labels(self.n_qubits))
        clean = {}
        for lab, p in self.probs.items():
            if lab not in labels:
                raise ValueError(f"label {lab!r} is not a {self.n_qubits}-qubit Pauli string")
            p = float(p)
            if not (-1e-12 <= p <= 1 + 1e-12):
                raise ValueError(f"probability {p} for {lab} outside [0, 1]")
            clean[lab] = min(max(p, 0.0), 1.0)
        total = sum(clean.values())
        if abs(total - 1) > TRACE_TOL:
            raise ValueError(f"probabilities sum to {total!r}, expected 1")
        object.__setattr__(self, "probs", clean)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def vector(self) -> np.ndarray:
        """Probabilities as an array in :func:`pauli_labels` order."""
        return np.array([self.probs.get(lab, 0.0) for lab in pauli_labels(self.n_qubits)])

    @classmethod
    def from_vector(cls, vec: Sequence[float], n_qubits: int | None = None) -> "PauliChannel":
        vec = np.asarray(vec, dtype=float)
        if n_qubits is None:
            n_qubits = num_qubits(int(round(np.sqrt(vec.size))))
        labels = pauli_labels(n_qubits)
        if vec.size != len(labels):
            raise DimensionError(f"expected {len(labels)} probabilities, got {vec.size}")
        return cls(n_qubits, {lab: float(p) for lab, p in zip(labels, vec) if p != 0})

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        out = np.zeros_like(rho)
        for lab, p in self.probs.items():
            if p:
                P = pauli_matrix(lab)
                out += p * P @ rho @ P
        return out

    def __repr__(self):
        body = ", ".join(f"{k}: {v:.6g}" for k, v in self.probs.items() if v)
        return f"PauliChannel({self.n_qubits}, {{{body}}})"


def pauli_channel_to_kraus(pc: PauliChannel) -> KrausChannel:
    ops = [np.sqrt(p) * pauli_matrix(lab) for lab, p in pc.probs.items() if p > 0]
    return KrausChannel(tuple(ops))


def _check_prob(p: float, name: str) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")
    return p


def depolarizing_channel(p: float) -> PauliChannel:
    """Single-qubit ``rho -> p rho + (1 - p) I/2`` in Pauli form."""
    p = _check_prob(p, "p")
    e = (1 - p) / 4
    return PauliChannel(1, {"I": p + e, "X": e, "Y": e, "Z": e})


def bit_flip_channel(p0: float) -> PauliChannel:
    p0 = _check_prob(p0, "p0")
    return PauliChannel(1, {"I": p0, "X": 1 - p0})


def phase_flip_channel(p0: float) -> PauliChannel:
    p0 = _check_prob(p0, "p0")
    return PauliChannel(1, {"I": p0, "Z": 1 - p0})


def as_kraus(ch: KrausChannel | PauliChannel) -> KrausChannel:
    if isinstance(ch, PauliChannel):
        return pauli_channel_to_kraus(ch)
    return ch


# --------------------------------------------------------------------------
# Random instances (tests and demos)
# --------------------------------------------------------------------------

def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state drawn from the induced (Hilbert-Schmidt) measure."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_cptp(dim: int, rng: np.random.Generator, rank: int | None = None) -> KrausChannel:
    """Random CPTP map from a Haar-random Stinespring isometry."""
    rank = dim if rank is None else rank
    u = random_unitary(dim * rank, rng)
    iso = u[:, :dim]
    return KrausChannel(tuple(iso[k * dim:(k + 1) * dim] for k in range(rank)))


def random_pauli_channel(n_qubits: int, rng: np.random.Generator, identity_max: bool = False) -> PauliChannel:
    """Random Pauli channel; with ``identity_max`` the ``I`` weight is the strict maximum."""
    p = rng.dirichlet(np.ones(4**n_qubits))
    if identity_max:
        top = int(np.argmax(p))
        p[0], p[top] = p[top], p[0]
        if np.sum(p == p[0]) > 1:
            return random_pauli_channel(n_qubits, rng, identity_max)
    return PauliChannel.from_vector(p, n_qubits)


# --------------------------------------------------------------------------
# Channel specification documents
# --------------------------------------------------------------------------

def _parse_complex_matrix(raw, dim: int) -> np.ndarray:
    arr = np.asarray(raw, dtype=float)
    if arr.shape == (dim * dim, 2):
        arr = arr.reshape(dim, dim, 2)
    if arr.shape != (dim, dim, 2):
        raise ChannelSpecError(f"Kraus operator has shape {arr.shape[:-1]}, expected {dim}x{dim} of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def channel_from_spec(doc: Mapping) -> PauliChannel | KrausChannel:
    """Build a channel from a parsed specification document.

    Supported ``type`` values: ``pauli``, ``depolarizing``, ``bit_flip``,
    ``phase_flip``, ``kraus`` and ``identity``.
    """
    if not isinstance(doc, Mapping) or "type" not in doc:
        raise ChannelSpecError("channel spec must be an object with a 'type' field")
    kind = doc["type"]
    try:
        if kind == "pauli":
            probs = {str(k): float(v) for k, v in doc["probs"].items()}
            total = sum(probs.values())
            if abs(total - 1) > SPEC_SUM_TOL:
                raise ChannelSpecError(f"probabilities sum to {total!r}; normalization error")
            probs = {k: v / total for k, v in probs.items()}
            n = int(doc.get("n_qubits", len(next(iter(probs)))))
            return PauliChannel(n, probs)
        if kind == "depolarizing":
            return depolarizing_channel(doc["p"])
        if kind == "bit_flip":
            return bit_flip_channel(doc["p0"])
        if kind == "phase_flip":
            return phase_flip_channel(doc["p0"])
        if kind == "identity":
            return PauliChannel(num_qubits(int(doc.get("dim", 2))), {"I" * num_qubits(int(doc.get("dim", 2))): 1.0})
        if kind == "kraus":
            dim = int(doc["dim"])
            ch = KrausChannel(tuple(_parse_complex_matrix(op, dim) for op in doc["ops"]))
            ok, dev = is_cptp(ch, SPEC_SUM_TOL)
            if not ok:
                raise ChannelSpecError(f"Kraus operators violate completeness by {dev:.3g}")
            return ch
    except ChannelSpecError:
        raise
    except (KeyError, TypeError, ValueError, StopIteration) as exc:
        raise ChannelSpecError(f"invalid {kind!r} channel spec: {exc}") from exc
    raise ChannelSpecError(f"unknown channel type {kind!r}")


def load_channel_spec(text: str) -> PauliChannel | KrausChannel:
    """Parse JSON text into a channel. JSON syntax errors keep line/column info."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelSpecError(f"{exc.msg} at line {exc.lineno} column {exc.colno}") from exc
    return channel_from_spec(doc)
