"""Angular-momentum algebra and spin coherent states for integer spin j.

Basis convention: row/column ``k`` of every matrix corresponds to the J_z
eigenvalue ``m = j - k`` (so row 0 is ``|j, j>``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as la

MAX_J = 4096
NORM_TOL = 1e-6
IMAG_TOL = 1e-10


@dataclass(frozen=True)
class SphericalPoint:
    """A point on the unit sphere, kept in canonical range.

    ``theta`` lies in [0, pi] and ``phi`` in [0, 2pi); at the poles ``phi``
    is set to 0.
    """

    theta: float
    phi: float

    def __post_init__(self):
        theta, phi = canonical_angles(self.theta, self.phi)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_cartesian(cls, x: float, y: float, z: float) -> "SphericalPoint":
        r = math.sqrt(x * x + y * y + z * z)
        theta = math.acos(max(-1.0, min(1.0, z / r)))
        phi = math.atan2(y, x)
        return cls(theta, phi)

    def cartesian(self) -> tuple[float, float, float]:
        st = math.sin(self.theta)
        return (st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta))

    def separation(self, other: "SphericalPoint") -> float:
        """Great-circle distance in radians."""
        a = np.array(self.cartesian())
        b = np.array(other.cartesian())
        # atan2 form stays accurate for tiny separations
        return float(math.atan2(np.linalg.norm(np.cross(a, b)), float(a @ b)))


def canonical_angles(theta: float, phi: float) -> tuple[float, float]:
    """Wrap an arbitrary (theta, phi) pair to theta in [0, pi], phi in [0, 2pi)."""
    theta = float(theta)
    phi = float(phi)
    if not (math.isfinite(theta) and math.isfinite(phi)):
        raise ValueError(f"non-finite angles ({theta}, {phi})")
    theta = math.fmod(theta, 2 * math.pi)
    if theta < 0:
        theta += 2 * math.pi
    if theta > math.pi:
        # going past the south pole flips the azimuth
        theta = 2 * math.pi - theta
        phi += math.pi
    if theta == 0.0 or theta == math.pi:
        return theta, 0.0
    phi = math.fmod(phi, 2 * math.pi)
    if phi < 0:
        phi += 2 * math.pi
    if phi >= 2 * math.pi:
        phi = 0.0
    return theta, phi


@dataclass(frozen=True, eq=False)
class SpinSpace:
    """Dense J_x, J_y, J_z matrices for spin ``j`` in the J_z eigenbasis."""

    j: int
    jx: np.ndarray = field(repr=False)
    jy: np.ndarray = field(repr=False)
    jz: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return 2 * self.j + 1

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.j, -self.j - 1, -1, dtype=float)

    @cached_property
    def jx_eigen(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and unitary eigenvectors of J_x."""
        return la.eigh(self.jx)

    @cached_property
    def jy_eigen(self) -> tuple[np.ndarray, np.ndarray]:
        return la.eigh(self.jy)

    def highest_weight(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def rotation_x(self, angle: float) -> np.ndarray:
        """exp(-i angle J_x) built from the cached eigendecomposition."""
        w, v = self.jx_eigen
        return (v * np.exp(-1j * angle * w)) @ v.conj().T

    def rotation_y(self, angle: float) -> np.ndarray:
        w, v = self.jy_eigen
        return (v * np.exp(-1j * angle * w)) @ v.conj().T


def build_spin_space(j: int, max_j: int = MAX_J) -> SpinSpace:
    if isinstance(j, bool) or not float(j).is_integer():
        raise ValueError(f"j must be a positive integer, got {j!r}")
    j = int(j)
    if j < 1:
        raise ValueError(f"j must be a positive integer, got {j}")
    if j > max_j:
        raise ValueError(f"j={j} exceeds the dimension cap j <= {max_j}")
    m = np.arange(j, -j - 1, -1, dtype=float)
    # <m+1|J_+|m> sits one row above the diagonal because m decreases down the rows
    ladder = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    jp = np.diag(ladder, 1).astype(complex)
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    jz = np.diag(m).astype(complex)
    for a in (jx, jy, jz):
        a.setflags(write=False)
    return SpinSpace(j=j, jx=jx, jy=jy, jz=jz)


@dataclass(frozen=True, eq=False)
class QuantumState:
    space: SpinSpace
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (self.space.dim,):
            raise ValueError(f"state has shape {amps.shape}, expected ({self.space.dim},)")
        object.__setattr__(self, "amps", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def overlap(self, other: "QuantumState") -> complex:
        return complex(np.vdot(self.amps, other.amps))


def coherent_state(space: SpinSpace, p: SphericalPoint, convention: str = "exponential") -> QuantumState:
    """Spin coherent state ``exp(i theta [J_x sin phi - J_y cos phi]) |j, j>``.

    The exponential is evaluated through the eigendecomposition of the
    Hermitian generator. ``convention="translation"`` multiplies by
    ``exp(-i j phi)`` so that ``exp(-i a J_z)|theta, phi> = |theta, phi + a>``
    holds exactly, phases included.
    """
    gen = p.theta * (space.jx * math.sin(p.phi) - space.jy * math.cos(p.phi))
    w, v = la.eigh(gen)
    amps = v @ (np.exp(1j * w) * v[0].conj())
    return QuantumState(space, amps * _phase(space, p.phi, convention))


def _phase(space: SpinSpace, phi, convention: str):
    if convention == "exponential":
        return 1.0
    if convention == "translation":
        return np.exp(-1j * space.j * np.asarray(phi))
    raise ValueError(f"unknown phase convention {convention!r}")


def coherent_states_batch(space: SpinSpace, thetas, phis, convention: str = "exponential") -> np.ndarray:
    """Coherent states for paired arrays of angles, one column per point.

    Uses ``exp(i theta [J_x sin phi - J_y cos phi]) = R_z(phi) exp(-i theta J_y) R_z(-phi)``
    with the cached J_y eigendecomposition, which yields the same vector
    (same phase) as :func:`coherent_state` at a fraction of the cost.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    d = _rotated_north(space, thetas)
    # component m picks up exp(-i m phi) from R_z(phi) and exp(i j phi) from R_z(-phi)|j,j>
    shift = np.exp(1j * np.outer(space.j - space.m_values, phis))
    return d * shift * _phase(space, phis, convention)


def _rotated_north(space: SpinSpace, thetas: np.ndarray) -> np.ndarray:
    """Columns exp(-i theta J_y)|j, j> for each theta."""
    w, v = space.jy_eigen
    return v @ (np.exp(-1j * np.outer(w, thetas)) * v[0].conj()[:, None])


def expectations(state: QuantumState, norm_tol: float = NORM_TOL) -> tuple[float, float, float]:
    psi = state.amps
    if abs(np.linalg.norm(psi) - 1.0) > norm_tol:
        raise ValueError(f"state is not normalized (norm {np.linalg.norm(psi):.3e})")
    sp = state.space
    vals = [complex(np.vdot(psi, op @ psi)) for op in (sp.jx, sp.jy, sp.jz)]
    worst = max(abs(v.imag) for v in vals)
    if worst > IMAG_TOL * max(1, sp.j):
        raise ArithmeticError(f"expectation has imaginary part {worst:.3e}; operator not Hermitian?")
    return vals[0].real, vals[1].real, vals[2].real


def expectations_batch(space: SpinSpace, psis: np.ndarray) -> np.ndarray:
    """<J_x>, <J_y>, <J_z> for every column of ``psis``; returns shape (3, n)."""
    m = space.m_values
    jz = (np.abs(psis) ** 2 * m[:, None]).sum(axis=0)
    # J_+ is the only off-diagonal structure: <J_+> = sum_k ladder_k conj(psi_k) psi_{k+1}
    ladder = np.diagonal(space.jx, 1).real * 2
    jp = (ladder[:, None] * psis[:-1].conj() * psis[1:]).sum(axis=0)
    return np.vstack([jp.real, jp.imag, jz])


def closed_form_coherent(space: SpinSpace, p: SphericalPoint) -> np.ndarray:
    """Binomial expansion of the exponential coherent state; used as a cross-check only."""
    k = np.arange(space.dim)
    c, s = math.cos(p.theta / 2), math.sin(p.theta / 2)
    if s == 0.0 or c == 0.0:
        out = np.zeros(space.dim, dtype=complex)
        out[0 if s == 0.0 else -1] = 1.0
        return out * np.exp(1j * k * p.phi)
    n = 2 * space.j
    log_binom = np.array([0.5 * (math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1)) for i in k])
    mag = np.exp(log_binom + (n - k) * math.log(c) + k * math.log(s))
    return mag * np.exp(1j * k * p.phi)
