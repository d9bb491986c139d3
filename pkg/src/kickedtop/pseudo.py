"""Amplitude-weighted pseudoclassical propagation near quantum resonance.

At ``beta = 4 j pi r/s + delta`` one period factorises into the detuned top
(kick strength ``delta``) followed by ``exp(-i 2 pi r/s J_z^2)``. The first
part moves a phase-space point with the classical map; the second splits a
coherent state into copies shifted in phi, weighted by quadratic Gauss sums.
A pseudoclassical state is therefore a finite set of points with complex
amplitudes, and points that land on top of each other interfere.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.sparse import coo_matrix
from scipy.spatial import cKDTree

from .classical import angles_to_xyz, map_xyz, xyz_to_angles
from .spin import SphericalPoint, SpinSpace, coherent_states_batch
from .quantum import resonant_kick_phases

log = logging.getLogger(__name__)

MERGE_TOL = 1e-9
CANCEL_TOL = 1e-10
NORM_DRIFT_TOL = 1e-9
AMP_THRESHOLD = 1e-12
MAX_POINTS = 2**16


class PointCountExceeded(RuntimeError):
    """Raised when a pseudoclassical state proliferates past the configured cap."""


def _check_coprime(r: int, s: int) -> None:
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    if math.gcd(r, s) != 1:
        raise ValueError(f"r={r} and s={s} are not coprime")


@dataclass(frozen=True)
class ResonanceOffset:
    r: int
    s: int
    delta: float

    def __post_init__(self):
        _check_coprime(self.r, self.s)
        if not math.isfinite(self.delta):
            raise ValueError("delta must be finite")

    def beta(self, j: int) -> float:
        return 4 * j * math.pi * self.r / self.s + self.delta


def gaussian_sums(r: int, s: int) -> np.ndarray:
    """``G_l = (1/s) sum_k exp(-i 2 pi r k (k - l) / s)`` for l = 0..s-1."""
    _check_coprime(r, s)
    k = np.arange(s, dtype=np.int64)
    # reduce the exponent mod s in integers before touching floats
    expo = (r * k[None, :] * (k[None, :] - k[:, None])) % s
    return np.exp(-2j * np.pi * expo / s).sum(axis=1) / s


@dataclass(frozen=True)
class BranchTable:
    r: int
    s: int
    shifts: np.ndarray
    amps: np.ndarray

    @property
    def n_branches(self) -> int:
        return len(self.shifts)


def build_branch_table(r: int, s: int, amp_threshold: float = AMP_THRESHOLD) -> BranchTable:
    g = gaussian_sums(r, s)
    # shift of branch l is 2 pi (r l mod s)/s; grouping on the integer residue is exact
    residues = (r * np.arange(s, dtype=np.int64)) % s
    grouped: dict[int, complex] = {}
    for res, gl in zip(residues.tolist(), g):
        grouped[res] = grouped.get(res, 0j) + gl
    keep = sorted(res for res, a in grouped.items() if abs(a) >= amp_threshold)
    shifts = np.array([2 * math.pi * res / s for res in keep])
    amps = np.array([grouped[res] for res in keep], dtype=complex)
    return BranchTable(r, s, shifts, amps)


@dataclass(frozen=True, eq=False)
class WeightedPointSet:
    """Points on the sphere with complex amplitudes, sorted by (theta, phi)."""

    theta: np.ndarray
    phi: np.ndarray
    amp: np.ndarray = field(repr=False)

    @classmethod
    def single(cls, p: SphericalPoint, amp: complex = 1.0) -> "WeightedPointSet":
        return cls(np.array([p.theta]), np.array([p.phi]), np.array([amp], dtype=complex))

    def __len__(self) -> int:
        return len(self.theta)

    @property
    def entries(self) -> list[tuple[SphericalPoint, complex]]:
        return [(SphericalPoint(t, p), complex(a)) for t, p, a in zip(self.theta, self.phi, self.amp)]

    @property
    def total_weight(self) -> float:
        return float(np.sum(np.abs(self.amp) ** 2))


def merge_points(
    theta,
    phi,
    amp,
    merge_tol: float = MERGE_TOL,
    cancel_tol: float = CANCEL_TOL,
) -> WeightedPointSet:
    """Combine coincident children by summing amplitudes and drop those that cancel."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    amp = np.asarray(amp, dtype=complex)
    n = len(theta)
    if n == 0:
        return WeightedPointSet(theta, phi, amp)
    order = np.lexsort((phi, theta))
    theta, phi, amp = theta[order], phi[order], amp[order]
    xyz = np.column_stack(angles_to_xyz(theta, phi))
    # chord length for a great-circle distance merge_tol
    pairs = cKDTree(xyz).query_pairs(2 * math.sin(merge_tol / 2), output_type="ndarray")
    if len(pairs):
        graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
        _, labels = connected_components(graph, directed=False)
        # first member (in sorted order) represents its cluster
        _, first = np.unique(labels, return_index=True)
        summed = np.zeros(len(first), dtype=complex)
        np.add.at(summed, labels, amp)
        # np.unique orders by label; map back to representatives
        reps = first[np.argsort(first)]
        summed = summed[labels[reps]]
        theta, phi, amp = theta[reps], phi[reps], summed
    keep = np.abs(amp) >= cancel_tol
    theta, phi, amp = theta[keep], phi[keep], amp[keep]
    weight = float(np.sum(np.abs(amp) ** 2))
    if weight > 0 and abs(weight - 1.0) > NORM_DRIFT_TOL:
        log.info("renormalising point set: total weight %.12f", weight)
        amp = amp / math.sqrt(weight)
    return WeightedPointSet(theta, phi, amp)


def pseudo_step(
    pts: WeightedPointSet,
    alpha: float,
    delta: float,
    table: BranchTable,
    max_points: int = MAX_POINTS,
    merge_tol: float = MERGE_TOL,
    cancel_tol: float = CANCEL_TOL,
) -> WeightedPointSet:
    x, y, z = map_xyz(*angles_to_xyz(pts.theta, pts.phi), alpha, delta)
    th, ph = xyz_to_angles(x, y, z)
    nb = table.n_branches
    child_theta = np.repeat(th, nb)
    child_phi = np.mod(np.repeat(ph, nb) + np.tile(table.shifts, len(th)), 2 * math.pi)
    child_amp = np.repeat(pts.amp, nb) * np.tile(table.amps, len(th))
    out = merge_points(child_theta, child_phi, child_amp, merge_tol, cancel_tol)
    if len(out) > max_points:
        raise PointCountExceeded(
            f"pseudoclassical state has {len(out)} points (cap {max_points}); "
            f"r/s = {table.r}/{table.s}, alpha = {alpha}, delta = {delta}"
        )
    return out


def pseudo_expectations(pts: WeightedPointSet, j: int) -> tuple[float, float, float]:
    w = np.abs(pts.amp) ** 2
    x, y, z = angles_to_xyz(pts.theta, pts.phi)
    return float(j * w @ x), float(j * w @ y), float(j * w @ z)


def pseudo_evolve(
    init: SphericalPoint,
    alpha: float,
    delta: float,
    table: BranchTable,
    n_steps: int,
    **kwargs,
) -> list[WeightedPointSet]:
    """Point sets after 0..n_steps periods."""
    states = [WeightedPointSet.single(init)]
    for _ in range(n_steps):
        states.append(pseudo_step(states[-1], alpha, delta, table, **kwargs))
    return states


def pseudo_trace(init: SphericalPoint, alpha: float, delta: float, table: BranchTable, n_steps: int, j: int, **kwargs) -> np.ndarray:
    """Weighted expectations along a pseudoclassical run; shape (n_steps + 1, 3)."""
    states = pseudo_evolve(init, alpha, delta, table, n_steps, **kwargs)
    return np.array([pseudo_expectations(s, j) for s in states])


# sign tables relating beta = resonance + delta to beta = delta at alpha = pi/2
CASE1_SIGNS = np.array([
    [1, 1, 1],
    [-1, -1, 1],
    [1, -1, -1],
    [-1, 1, -1],
])
CASE2_SIGNS = np.array([
    [1, 1, 1],
    [0, 0, 1],
    [0, 0, 0],
    [0, -1, 0],
    [1, -1, -1],
    [0, 0, -1],
    [0, 0, 0],
    [0, 1, 0],
])
SYNC_TABLES = {"case1": CASE1_SIGNS, "case2": CASE2_SIGNS}


def _require_half_pi(alpha: float) -> None:
    if abs(alpha - math.pi / 2) > 1e-12:
        raise ValueError(f"synchronisation tables are only derived for alpha = pi/2, got {alpha}")


def predict_sync_case1(reference_trace, n: int, alpha: float = math.pi / 2) -> tuple[float, float, float]:
    """Case I (r/s = 1/2) expectations at step n from the beta = delta trace."""
    _require_half_pi(alpha)
    ref = np.asarray(reference_trace)[n]
    return tuple(float(v) for v in CASE1_SIGNS[n % 4] * ref)


def predict_sync_case2(reference_trace, n: int, alpha: float = math.pi / 2) -> tuple[float, float, float]:
    """Case II (r/s = 1/4) expectations at step n from the beta = delta trace; zeros are exact."""
    _require_half_pi(alpha)
    ref = np.asarray(reference_trace)[n]
    return tuple(float(v) for v in CASE2_SIGNS[n % 8] * ref)


def predict_sync(table_id: str, reference_trace) -> np.ndarray:
    signs = SYNC_TABLES[table_id]
    ref = np.asarray(reference_trace)
    return signs[np.arange(len(ref)) % len(signs)] * ref


def verify_splitting_identity(space: SpinSpace, p: SphericalPoint, r: int, s: int) -> float:
    """Residual of ``exp(-i 2 pi r/s J_z^2)|p> = sum_l G_l |theta, phi + 2 pi r l/s>``.

    Both sides use the translation phase convention, under which
    ``exp(-i a J_z)`` shifts phi by ``a`` exactly; the identity is then exact.
    """
    _check_coprime(r, s)
    if space.j > 100:
        raise ValueError("dense splitting check is limited to j <= 100")
    lhs = resonant_kick_phases(space, r, s, 0.0) * coherent_states_batch(space, p.theta, p.phi, "translation")[:, 0]
    shifted = p.phi + 2 * math.pi * r * np.arange(s) / s
    rhs = coherent_states_batch(space, np.full(s, p.theta), shifted, "translation") @ gaussian_sums(r, s)
    return float(np.linalg.norm(lhs - rhs))
