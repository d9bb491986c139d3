"""The classical kicked-top map on the unit sphere."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spin import SphericalPoint, canonical_angles


@dataclass(frozen=True)
class CartesianState:
    x: float
    y: float
    z: float

    @classmethod
    def from_point(cls, p: SphericalPoint) -> "CartesianState":
        return cls(*p.cartesian())

    def to_point(self) -> SphericalPoint:
        return SphericalPoint.from_cartesian(self.x, self.y, self.z)

    @property
    def norm(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)


def map_xyz(x, y, z, alpha: float, beta: float):
    """Vectorised map: rotate by alpha about x, then by beta*Z about z. Renormalises."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    yt = y * ca - z * sa
    zt = y * sa + z * ca
    c, s = np.cos(beta * zt), np.sin(beta * zt)
    xn = x * c - yt * s
    yn = x * s + yt * c
    r = np.sqrt(xn * xn + yn * yn + zt * zt)
    return xn / r, yn / r, zt / r


def inverse_map_xyz(x, y, z, alpha: float, beta: float):
    # z is untouched by the kick, so its angle can be undone first
    c, s = np.cos(beta * z), np.sin(beta * z)
    xt = x * c + y * s
    yt = -x * s + y * c
    ca, sa = math.cos(alpha), math.sin(alpha)
    return xt, yt * ca + z * sa, -yt * sa + z * ca


def classical_step(state: CartesianState, alpha: float, beta: float) -> CartesianState:
    x, y, z = map_xyz(state.x, state.y, state.z, alpha, beta)
    return CartesianState(float(x), float(y), float(z))


def angles_to_xyz(theta, phi):
    st = np.sin(theta)
    return st * np.cos(phi), st * np.sin(phi), np.cos(theta)


def xyz_to_angles(x, y, z):
    """Canonical (theta, phi) arrays, phi in [0, 2pi) and 0 at the poles."""
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    phi = np.mod(np.arctan2(y, x), 2 * math.pi)
    phi = np.where(phi >= 2 * math.pi, 0.0, phi)
    phi = np.where((theta == 0.0) | (theta == math.pi), 0.0, phi)
    return theta, phi


def map_angles(p: SphericalPoint, alpha: float, beta: float) -> SphericalPoint:
    x, y, z = map_xyz(*p.cartesian(), alpha, beta)
    theta, phi = xyz_to_angles(x, y, z)
    return SphericalPoint(*canonical_angles(float(theta), float(phi)))


@dataclass
class Trajectory:
    alpha: float
    beta: float
    points: list[SphericalPoint] = field(default_factory=list)

    def as_array(self) -> np.ndarray:
        return np.array([(p.theta, p.phi) for p in self.points])


def iterate_angles(theta, phi, alpha: float, beta: float, n_steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Iterate many seeds at once. Returns arrays of shape (n_steps + 1, n_seeds)."""
    x, y, z = angles_to_xyz(np.atleast_1d(theta).astype(float), np.atleast_1d(phi).astype(float))
    th = np.empty((n_steps + 1, x.size))
    ph = np.empty_like(th)
    th[0], ph[0] = xyz_to_angles(x, y, z)
    for n in range(1, n_steps + 1):
        x, y, z = map_xyz(x, y, z, alpha, beta)
        th[n], ph[n] = xyz_to_angles(x, y, z)
    return th, ph


def uniform_seeds(n: int, rng: np.random.Generator | None = None) -> list[SphericalPoint]:
    """Seeds uniform on the sphere: a grid in (cos theta, phi), or random draws if rng is given."""
    if rng is not None:
        u = rng.uniform(-1.0, 1.0, n)
        ph = rng.uniform(0.0, 2 * math.pi, n)
    else:
        side = max(1, int(math.ceil(math.sqrt(n))))
        u_nodes = -1.0 + (np.arange(side) + 0.5) * 2.0 / side
        ph_nodes = (np.arange(side) + 0.5) * 2 * math.pi / side
        uu, pp = np.meshgrid(u_nodes, ph_nodes, indexing="ij")
        u, ph = uu.ravel()[:n], pp.ravel()[:n]
    return [SphericalPoint(math.acos(a), b) for a, b in zip(u, ph)]


def phase_portrait(alpha: float, beta: float, seeds: list[SphericalPoint], n_steps: int) -> list[Trajectory]:
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    th, ph = iterate_angles([p.theta for p in seeds], [p.phi for p in seeds], alpha, beta, n_steps)
    return [
        Trajectory(alpha, beta, [SphericalPoint(a, b) for a, b in zip(th[:, i], ph[:, i])])
        for i in range(len(seeds))
    ]
