"""Single-qubit linear entropy, its time series, and time-averaged entropy maps."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import KickedTop
from .pseudo import PointCountExceeded, pseudo_trace
from .quantum import evolve_batch, grid_nodes
from .spin import SphericalPoint, coherent_states_batch

log = logging.getLogger(__name__)

LENGTH_TOL = 1e-6
WORKERS_ENV = "KICKEDTOP_WORKERS"


def linear_entropy(jx: float, jy: float, jz: float, j: int, tol: float = LENGTH_TOL) -> float:
    """``S = (1 - |<J>|^2 / j^2) / 2``, clamped to [0, 1/2]."""
    r2 = (jx * jx + jy * jy + jz * jz) / (j * j)
    if r2 > (1 + tol) ** 2:
        raise ValueError(f"expectation vector is longer than j (|<J>|/j = {math.sqrt(r2):.9f})")
    return min(0.5, max(0.0, 0.5 * (1.0 - r2)))


def entropy_from_traces(traces: np.ndarray, j: int) -> np.ndarray:
    """Linear entropy of traces shaped (steps, 3) or (steps, 3, n_points)."""
    r2 = (np.asarray(traces) ** 2).sum(axis=1) / j**2
    if np.nanmax(r2) > (1 + LENGTH_TOL) ** 2:
        raise ValueError("expectation vector is longer than j")
    return np.clip(0.5 * (1.0 - r2), 0.0, 0.5)


@dataclass(frozen=True)
class EntropyTrace:
    values: np.ndarray
    source: str


def _engine_traces(engine: str, top: KickedTop, thetas, phis, tau: int) -> np.ndarray:
    """Expectation traces for a batch of initial points: shape (tau + 1, 3, n_points)."""
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    if engine == "quantum":
        psis = coherent_states_batch(top.space(), thetas, phis)
        return evolve_batch(top.floquet(), psis, tau)
    if engine == "pseudoclassical":
        table = top.branch_table()
        out = np.full((tau + 1, 3, len(thetas)), np.nan)
        for i, (t, p) in enumerate(zip(thetas, phis)):
            try:
                out[:, :, i] = pseudo_trace(SphericalPoint(t, p), top.alpha, top.delta, table, tau, top.j)
            except PointCountExceeded as exc:
                log.warning("node (%.6f, %.6f) dropped: %s", t, p, exc)
        return out
    raise ValueError(f"entropy needs engine 'quantum' or 'pseudoclassical', got {engine!r}")


def entropy_trace(engine: str, top: KickedTop, init: SphericalPoint, tau: int) -> EntropyTrace:
    traces = _engine_traces(engine, top, [init.theta], [init.phi], tau)
    if np.isnan(traces).any():
        raise PointCountExceeded("pseudoclassical run exceeded the point cap")
    return EntropyTrace(entropy_from_traces(traces, top.j)[:, 0], engine)


@dataclass(frozen=True, eq=False)
class EntropyField:
    grid: np.ndarray
    theta_nodes: np.ndarray
    phi_nodes: np.ndarray
    tau: int
    stride: int
    engine: str
    top: KickedTop

    def value_at(self, theta: float, phi: float) -> float:
        """Nearest-node lookup."""
        a = int(np.argmin(np.abs(self.theta_nodes - theta)))
        dphi = np.abs((self.phi_nodes - phi + math.pi) % (2 * math.pi) - math.pi)
        return float(self.grid[a, int(np.argmin(dphi))])


def _row_job(args) -> np.ndarray:
    engine, top, theta, phis, tau, stride = args
    traces = _engine_traces(engine, top, np.full(len(phis), theta), phis, tau)
    s = entropy_from_traces(traces, top.j)  # (tau + 1, n_phi)
    return s[stride::stride].mean(axis=0)


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def entropy_field_stride(
    engine: str,
    top: KickedTop,
    grid_n: int,
    tau: int,
    stride: int,
    workers: int | None = None,
) -> EntropyField:
    """Average S(n) over n = stride, 2 stride, ... <= tau on a grid_n x grid_n grid.

    S(0) never enters. ``stride > tau`` leaves no sample and is rejected.
    Rows are independent work items; the result does not depend on ``workers``.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    if tau < 1 or stride < 1:
        raise ValueError("tau and stride must be >= 1")
    if stride > tau:
        raise ValueError(f"stride {stride} > tau {tau}: no step n <= tau with n = 0 mod stride besides n = 0")
    thetas, phis = grid_nodes(grid_n, grid_n)
    jobs = [(engine, top, float(t), phis, tau, stride) for t in thetas]
    workers = default_workers() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row_job, jobs))
    else:
        rows = [_row_job(job) for job in jobs]
    return EntropyField(np.vstack(rows), thetas, phis, tau, stride, engine, top)


def entropy_field(engine: str, top: KickedTop, grid_n: int, tau: int, workers: int | None = None) -> EntropyField:
    """``S_tau = (1/tau) sum_{n=1}^{tau} S(n)`` for each initial coherent state of the grid."""
    return entropy_field_stride(engine, top, grid_n, tau, 1, workers)
