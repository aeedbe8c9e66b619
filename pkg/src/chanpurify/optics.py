"""Jones-calculus model of the polarization and path optics.

Wave-plate convention (angles in radians, fast axis measured from H)::

    HWP(t) = i [[cos 2t, sin 2t], [sin 2t, -cos 2t]]
    QWP(t) = exp(-i pi/4) R(-t) diag(1, i) R(t),  R(t) = [[cos t, sin t], [-sin t, cos t]]

Both have unit determinant and ``HWP(t) @ HWP(t) == -I``. With these,
``QWP(pi/4) HWP(t) QWP(pi/4) == diag(exp(-i T), exp(i T))`` with
``T = 2 (t - pi/4)`` exactly, and the QWP-HWP-QWP settings
(0, 0, 0), (0, 45, 0), (0, 45, 90), (0, 0, 90) degrees realize
``I, -iX, -iY, -iZ`` up to a global phase.

Beam-splitter convention: entry ``(i, j)`` of :func:`bs_unitary` is the
amplitude for input path ``i`` to leave through output path ``j``, so the
path-space operator applied to a column vector of amplitudes is its
transpose.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

from .qcore import X, Y, Z

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


class UnsupportedConfiguration(ValueError):
    """The beam splitter is not balanced."""


def wrap_phase(phi: float) -> float:
    """Map an angle into ``(-pi, pi]``."""
    out = math.remainder(phi, 2 * math.pi)
    return math.pi if out == -math.pi else out


def _rot(t: float) -> np.ndarray:
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, s], [-s, c]], dtype=complex)


def hwp(theta: float) -> np.ndarray:
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    return 1j * np.array([[c, s], [s, -c]], dtype=complex)


def qwp(theta: float) -> np.ndarray:
    return np.exp(-1j * np.pi / 4) * _rot(-theta) @ np.diag([1, 1j]) @ _rot(theta)


def phase_tuner(theta: float) -> np.ndarray:
    """``QWP(pi/4) HWP(theta) QWP(pi/4)``."""
    return qwp(np.pi / 4) @ hwp(theta) @ qwp(np.pi / 4)


def tuner_angle(big_theta: float) -> float:
    """HWP angle that makes the phase tuner apply ``diag(e^{-i T}, e^{i T})``."""
    return big_theta / 2 + np.pi / 4


@dataclass(frozen=True)
class WavePlateSetting:
    element: str
    angle: float

    def __post_init__(self):
        if self.element not in ("HWP", "QWP"):
            raise ValueError(f"element must be 'HWP' or 'QWP', got {self.element!r}")
        if not math.isfinite(self.angle):
            raise ValueError("angle must be finite")

    def matrix(self) -> np.ndarray:
        return hwp(self.angle) if self.element == "HWP" else qwp(self.angle)


def waveplate_chain(settings: Sequence[WavePlateSetting]) -> np.ndarray:
    """Jones matrix of plates traversed in order (first element acts first)."""
    if not settings:
        raise ValueError("need at least one wave plate")
    m = np.eye(2, dtype=complex)
    for s in settings:
        m = s.matrix() @ m
    return m


def qhq(q1_deg: float, h_deg: float, q2_deg: float) -> np.ndarray:
    """QWP-HWP-QWP combination with angles in degrees."""
    r = np.deg2rad
    return waveplate_chain([WavePlateSetting("QWP", r(q1_deg)), WavePlateSetting("HWP", r(h_deg)), WavePlateSetting("QWP", r(q2_deg))])


PAULI_SETTINGS = {
    "I": (0.0, 0.0, 0.0),
    "-iX": (0.0, 45.0, 0.0),
    "-iY": (0.0, 45.0, 90.0),
    "-iZ": (0.0, 0.0, 90.0),
}
PAULI_TARGETS = {"I": np.eye(2, dtype=complex), "-iX": -1j * X, "-iY": -1j * Y, "-iZ": -1j * Z}


def global_phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Max-norm distance between ``a`` and ``b`` after removing a global phase.

    The phase is taken from the largest-magnitude entry of ``b``.
    """
    a, b = np.asarray(a), np.asarray(b)
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(a[idx]) == 0:
        return float(np.max(np.abs(a - b)))
    phase = (a[idx] / abs(a[idx])) / (b[idx] / abs(b[idx]))
    return float(np.max(np.abs(a - phase * b)))


def rotation_from_axis_angle(n: Sequence[float], theta: float) -> np.ndarray:
    """``cos(t/2) I + sin(t/2)(n_x(-iX) + n_y(-iY) + n_z(-iZ))``."""
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1) > 1e-9:
        raise ValueError(f"rotation axis must be a unit 3-vector, got {n}")
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return c * np.eye(2) + s * (n[0] * (-1j * X) + n[1] * (-1j * Y) + n[2] * (-1j * Z))


# --------------------------------------------------------------------------
# Beam splitter and phase compensation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BsPhases:
    """Reflectance/transmittance and per-polarization phases, in radians."""

    R: float = 0.5
    T: float = 0.5
    phi0_H: float = 0.0
    phi0_V: float = 0.0
    phi_tau_H: float = 0.0
    phi_tau_V: float = 0.0
    phi_rho_H: float = 0.0
    phi_rho_V: float = 0.0

    def __post_init__(self):
        if self.R < 0 or self.T < 0 or abs(self.R + self.T - 1) > 1e-12:
            raise ValueError(f"need R, T >= 0 and R + T = 1, got R={self.R}, T={self.T}")

    def for_polarization(self, pol: str) -> tuple[float, float, float]:
        if pol not in ("H", "V"):
            raise ValueError(f"polarization must be 'H' or 'V', got {pol!r}")
        return getattr(self, f"phi0_{pol}"), getattr(self, f"phi_tau_{pol}"), getattr(self, f"phi_rho_{pol}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "BsPhases":
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown BsPhases fields: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in doc.items()})

    @classmethod
    def random(cls, rng: np.random.Generator) -> "BsPhases":
        vals = rng.uniform(-np.pi, np.pi, size=6)
        return cls(0.5, 0.5, *vals)


@dataclass(frozen=True)
class Compensation:
    theta1: float
    theta2: float
    theta3: float
    theta4: float
    delta: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Compensation":
        return cls(**{k: float(doc[k]) for k in cls.__dataclass_fields__})


def bs_unitary(phases: BsPhases, polarization: str) -> np.ndarray:
    """Beam-splitter matrix for one polarization (see module docstring)."""
    p0, pt, pr = phases.for_polarization(polarization)
    r, t = math.sqrt(phases.R), math.sqrt(phases.T)
    return np.exp(1j * p0) * np.array(
        [[r * np.exp(1j * pt), t * np.exp(1j * pr)], [-t * np.exp(-1j * pr), r * np.exp(-1j * pt)]]
    )


def compensation_residuals(phases: BsPhases, comp: Compensation) -> np.ndarray:
    """Residuals of the four phase conditions, wrapped into ``(-pi, pi]``."""
    p = phases
    res = [
        comp.theta1 - comp.theta2 + comp.delta - (p.phi_rho_H + p.phi_tau_H + np.pi),
        comp.theta1 - comp.theta2 - comp.delta - (-p.phi_rho_V - p.phi_tau_V + np.pi),
        2 * comp.theta3 - (p.phi0_H + p.phi_tau_H - p.phi0_V - p.phi_tau_V - 2 * comp.theta1),
        2 * comp.theta4 - (p.phi0_H + p.phi_rho_H - p.phi0_V - p.phi_rho_V - 2 * comp.theta1),
    ]
    return np.array([wrap_phase(x) for x in res])


def solve_compensation(phases: BsPhases, theta1: float = 0.0) -> Compensation:
    """Phase-tuner and tilt settings turning the BS into a path Hadamard.

    Only ``theta1 - theta2``, ``theta1 + theta3`` and ``theta1 + theta4`` are
    constrained, so ``theta1`` is a free parameter (pinned to 0 by default).
    """
    if abs(phases.R - phases.T) > 1e-12:
        raise UnsupportedConfiguration(f"only balanced beam splitters are supported (R={phases.R}, T={phases.T})")
    p = phases
    rhs_h = p.phi_rho_H + p.phi_tau_H + np.pi
    rhs_v = -p.phi_rho_V - p.phi_tau_V + np.pi
    diff = (rhs_h + rhs_v) / 2
    delta = (rhs_h - rhs_v) / 2
    theta3 = (p.phi0_H + p.phi_tau_H - p.phi0_V - p.phi_tau_V) / 2 - theta1
    theta4 = (p.phi0_H + p.phi_rho_H - p.phi0_V - p.phi_rho_V) / 2 - theta1
    return Compensation(
        theta1=wrap_phase(theta1),
        theta2=wrap_phase(theta1 - diff),
        theta3=wrap_phase(theta3),
        theta4=wrap_phase(theta4),
        delta=wrap_phase(delta),
    )


def compensated_gate(phases: BsPhases, comp: Compensation) -> np.ndarray:
    """Full operator on polarization (x) path: tuners + tilt, BS, tuners."""
    tun = lambda th: np.diag([np.exp(-1j * th), np.exp(1j * th)])  # noqa: E731
    proj = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    before = np.kron(tun(comp.theta1), proj[0]) + np.exp(1j * comp.delta) * np.kron(tun(comp.theta2), proj[1])
    pol_proj = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    bs = sum(np.kron(pp, bs_unitary(phases, pol).T) for pp, pol in zip(pol_proj, ("H", "V")))
    after = np.kron(tun(comp.theta3), proj[0]) + np.kron(tun(comp.theta4), proj[1])
    return after @ bs @ before


@dataclass(frozen=True)
class HadamardCheck:
    ok: bool
    residual: float
    plus_to_path0: float
    spatial_only_residual: float


def verify_spatial_hadamard(phases: BsPhases, comp: Compensation, tol: float = 1e-10, spatial_only: bool = False) -> HadamardCheck:
    """Check that the compensated BS acts as ``I_pol (x) D H`` on the path qubit.

    ``D`` is a diagonal matrix of output-path phases, which no path-basis
    measurement can see. ``residual`` measures the distance to that form;
    ``spatial_only_residual`` only asks for the path statistics to be those
    of a Hadamard for every polarization, which is all that matters when the
    polarization is traced out afterwards. ``plus_to_path0`` is the
    probability that path ``|+>`` exits on path 0, minimized over a set of
    polarization inputs.
    """
    W = compensated_gate(phases, comp)
    M = W @ np.kron(np.eye(2), HADAMARD).conj().T
    m = M.reshape(2, 2, 2, 2)  # (pol_out, path_out, pol_in, path_in)
    d = np.array([(m[0, j, 0, j] + m[1, j, 1, j]) / 2 for j in range(2)])
    ideal = np.kron(np.eye(2), np.diag(d))
    residual = float(np.max(np.abs(M - ideal)))
    # path-only: block diagonal in path and unitary within each path block
    offdiag = max(float(np.max(np.abs(m[:, 0, :, 1]))), float(np.max(np.abs(m[:, 1, :, 0]))))
    blocks = [m[:, j, :, j] for j in range(2)]
    unit_dev = max(float(np.max(np.abs(b.conj().T @ b - np.eye(2)))) for b in blocks)
    spatial_res = max(offdiag, unit_dev)
    worst = 1.0
    for pol in (np.array([1, 0]), np.array([0, 1]), np.array([1, 1]) / np.sqrt(2), np.array([1, 1j]) / np.sqrt(2)):
        out = W @ np.kron(pol, np.array([1, 1]) / np.sqrt(2))
        worst = min(worst, float(np.sum(np.abs(out.reshape(2, 2)[:, 0]) ** 2)))
    score = spatial_res if spatial_only else residual
    return HadamardCheck(bool(score <= tol and 1 - worst <= tol), residual, worst, spatial_res)
