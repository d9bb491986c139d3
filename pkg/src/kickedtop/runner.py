"""Dispatch an ExperimentConfig to the engines and write outputs plus a run manifest."""

from __future__ import annotations

import math
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import io as kio
from .classical import iterate_angles, phase_portrait, uniform_seeds
from .config import ExperimentConfig, check_output_dir
from .entanglement import entropy_field_stride, entropy_from_traces
from .model import KickedTop
from .pseudo import (
    CANCEL_TOL,
    MAX_POINTS,
    MERGE_TOL,
    SYNC_TABLES,
    build_branch_table,
    gaussian_sums,
    predict_sync,
    pseudo_evolve,
    pseudo_expectations,
    verify_splitting_identity,
)
from .quantum import check_resonance, evolve_batch, husimi
from .spin import QuantumState, SphericalPoint, coherent_state, coherent_states_batch

RELATIONS = ("identity", *SYNC_TABLES)
DEFAULT_COMPARE_TOL = 0.02


class EngineError(RuntimeError):
    """An engine failed while running a validated configuration."""


@dataclass
class RunManifest:
    config: dict
    versions: dict
    wall_clock: float
    derived: dict
    outputs: dict = field(default_factory=dict)
    report: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return kio.dumps_json({
            "config": self.config,
            "versions": self.versions,
            "wall_clock_seconds": self.wall_clock,
            "derived": self.derived,
            "outputs": self.outputs,
            "report": self.report,
        })


def versions() -> dict:
    return {"kickedtop": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()}


def _top(cfg: ExperimentConfig) -> KickedTop:
    return KickedTop(cfg.j, cfg.alpha, beta=cfg.beta, resonance=cfg.resonance)


class _Writer:
    def __init__(self, cfg: ExperimentConfig):
        self.dir = Path(cfg.out_dir)
        self.fmt = cfg.fmt
        self.digests: dict[str, str] = {}

    def put(self, name: str, text: str) -> None:
        self.digests[name] = kio.write_text(self.dir / name, text)


def run(cfg: ExperimentConfig) -> RunManifest:
    cfg.validate()
    check_output_dir(cfg.out_dir)
    top = _top(cfg)
    t0 = time.perf_counter()
    out = _Writer(cfg)
    derived = {"beta": top.beta_value, "delta": top.delta, "r": top.offset.r, "s": top.offset.s}
    if cfg.kind == "verify":
        derived["n_branches"] = build_branch_table(cfg.r, cfg.s).n_branches
    elif cfg.engine == "pseudoclassical":
        derived["n_branches"] = top.branch_table().n_branches
    try:
        report = _DISPATCH[cfg.kind](cfg, top, out)
    except (ArithmeticError, RuntimeError, MemoryError) as exc:
        raise EngineError(f"{cfg.kind}/{cfg.engine} failed: {exc}") from exc
    manifest = RunManifest(cfg.to_dict(), versions(), time.perf_counter() - t0, derived, out.digests, report or {})
    (Path(cfg.out_dir) / "manifest.json").write_text(manifest.to_json())
    return manifest


def _points(cfg) -> list[SphericalPoint]:
    return [SphericalPoint(t, p) for t, p in cfg.points]


def _pseudo_kwargs(cfg) -> dict:
    tol = cfg.tolerances
    return {
        "merge_tol": tol.get("merge", MERGE_TOL),
        "cancel_tol": tol.get("cancel", CANCEL_TOL),
        "max_points": int(tol.get("max_points", MAX_POINTS)),
    }


def _suffix(i: int, n: int) -> str:
    return "" if n == 1 else f"_{i}"


def _run_evolve(cfg, top, out):
    pts = _points(cfg)
    report = {}
    for i, p in enumerate(pts):
        sfx = _suffix(i, len(pts))
        if cfg.engine == "quantum":
            psi = coherent_state(top.space(), p)
            trace = evolve_batch(top.floquet(), psi.amps[:, None], cfg.steps)[:, :, 0]
        elif cfg.engine == "classical":
            th, ph = iterate_angles(p.theta, p.phi, top.alpha, top.beta_value, cfg.steps)
            st = np.sin(th[:, 0])
            trace = cfg.j * np.column_stack([st * np.cos(ph[:, 0]), st * np.sin(ph[:, 0]), np.cos(th[:, 0])])
        else:
            states = pseudo_evolve(p, top.alpha, top.delta, top.branch_table(), cfg.steps, **_pseudo_kwargs(cfg))
            trace = np.array([pseudo_expectations(s, cfg.j) for s in states])
            report[f"point_counts{sfx}"] = [len(s) for s in states]
            if out.fmt == "csv":
                out.put(f"points{sfx}.csv", kio.points_csv(states))
            else:
                out.put(f"points{sfx}.json", kio.points_json(states))
        if out.fmt == "csv":
            out.put(f"trace{sfx}.csv", kio.trace_csv(trace))
        else:
            out.put(f"trace{sfx}.json", kio.trace_json(trace, {"j": cfg.j, "engine": cfg.engine}))
    return report


def _run_husimi(cfg, top, out):
    if cfg.engine != "quantum":
        raise EngineError("husimi snapshots need the quantum engine")
    report = {}
    op = top.floquet()
    for i, p in enumerate(_points(cfg)):
        sfx = _suffix(i, len(cfg.points))
        psi = coherent_state(top.space(), p).amps
        done = 0
        for n in sorted(set(cfg.snapshots)):
            for _ in range(n - done):
                psi = op.apply(psi)
            done = n
            grid = husimi(QuantumState(top.space(), psi), cfg.n_theta, cfg.n_phi)
            report[f"quadrature{sfx}_n{n}"] = grid.quadrature()
            report[f"peak{sfx}_n{n}"] = list(grid.peak())
            if out.fmt == "csv":
                out.put(f"husimi{sfx}_n{n}.csv", kio.husimi_csv(grid))
            else:
                out.put(f"husimi{sfx}_n{n}.json", kio.husimi_json(grid, {"step": n, "j": cfg.j}))
    return report


def _run_entropy(cfg, top, out):
    pts = _points(cfg)
    if cfg.engine == "quantum":
        psis = coherent_states_batch(top.space(), [p.theta for p in pts], [p.phi for p in pts])
        traces = evolve_batch(top.floquet(), psis, cfg.tau)
    else:
        table = top.branch_table()
        traces = np.stack([
            np.array([pseudo_expectations(s, cfg.j)
                      for s in pseudo_evolve(p, top.alpha, top.delta, table, cfg.tau, **_pseudo_kwargs(cfg))])
            for p in pts
        ], axis=2)
    s = entropy_from_traces(traces, cfg.j)
    header = ["step"] + (["S"] if len(pts) == 1 else [f"S_{i}" for i in range(len(pts))])
    if out.fmt == "csv":
        out.put("entropy.csv", kio.rows_to_csv(header, ([n, *row] for n, row in enumerate(s))))
    else:
        out.put("entropy.json", kio.dumps_json({"engine": cfg.engine, "points": cfg.points, "S": s.T}))
    return {"S_tau": [float(v) for v in s[1:].mean(axis=0)]}


def _run_field(cfg, top, out):
    fld = entropy_field_stride(cfg.engine, top, cfg.grid_n, cfg.tau, cfg.stride, cfg.workers)
    side = kio.field_sidecar(fld)
    if out.fmt == "csv":
        out.put("field.csv", kio.matrix_csv(fld.grid))
        out.put("field.json", kio.dumps_json(side))
    else:
        out.put("field.json", kio.dumps_json({**side, "values": fld.grid}))
    return {"missing_nodes": int(np.isnan(fld.grid).sum()), "min": float(np.nanmin(fld.grid)), "max": float(np.nanmax(fld.grid))}


def _run_portrait(cfg, top, out):
    rng = np.random.default_rng(cfg.seed) if cfg.seeding == "random" else None
    seeds = uniform_seeds(cfg.seeds, rng)
    steps = max(cfg.steps, 1)
    trajs = phase_portrait(top.alpha, top.beta_value, seeds, steps)
    if out.fmt == "csv":
        out.put("portrait.csv", kio.portrait_csv(trajs))
    else:
        out.put("portrait.json", kio.portrait_json(trajs, {"alpha": top.alpha, "beta": top.beta_value}))
    return {"trajectories": len(trajs), "steps": steps}


def _run_verify(cfg, top, out):
    r, s = cfg.r, cfg.s
    if cfg.target == "gauss":
        g = gaussian_sums(r, s)
        table = build_branch_table(r, s)
        rows = [[l, v.real, v.imag, abs(v), math.atan2(v.imag, v.real) if abs(v) > 1e-12 else 0.0] for l, v in enumerate(g)]
        if out.fmt == "csv":
            out.put("gauss.csv", kio.rows_to_csv(["l", "re", "im", "abs", "arg"], rows))
            out.put("branches.csv", kio.rows_to_csv(
                ["k", "shift", "re_amp", "im_amp"],
                ([k + 1, d, a.real, a.imag] for k, (d, a) in enumerate(zip(table.shifts, table.amps)))))
        else:
            out.put("gauss.json", kio.dumps_json({"r": r, "s": s, "G": [[v.real, v.imag] for v in g],
                                                  "shifts": table.shifts, "amps": [[a.real, a.imag] for a in table.amps]}))
        return {
            "G": [[float(v.real), float(v.imag)] for v in g],
            "n_branches": table.n_branches,
            "weight": float(np.sum(np.abs(table.amps) ** 2)),
        }
    if cfg.target == "resonance":
        rep = check_resonance(top.space(), top.alpha, r, s)
        out.put("resonance.json", kio.dumps_json(rep))
        return {k: v for k, v in rep.items() if k != "quasienergies"}
    residuals = [verify_splitting_identity(top.space(), p, r, s) for p in _points(cfg)]
    out.put("splitting.json", kio.dumps_json({"r": r, "s": s, "points": cfg.points, "residuals": residuals}))
    return {"max_residual": max(residuals)}


_DISPATCH = {
    "evolve": _run_evolve,
    "husimi": _run_husimi,
    "entropy": _run_entropy,
    "field": _run_field,
    "portrait": _run_portrait,
    "verify": _run_verify,
}


def compare(trace_a, trace_b, relation: str, j: int, tol: float = DEFAULT_COMPARE_TOL) -> dict:
    """Residuals of ``trace_a`` against ``relation`` applied to the reference ``trace_b``.

    ``trace_a`` is the system near resonance, ``trace_b`` the beta = delta run.
    Residual at step n is the largest component deviation; ``tol`` is a fraction of j.
    """
    a = np.asarray(trace_a, dtype=float)
    b = np.asarray(trace_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"trace lengths differ: {a.shape} vs {b.shape}")
    if relation not in RELATIONS:
        raise ValueError(f"unknown relation {relation!r}; choose from {', '.join(RELATIONS)}")
    pred = b if relation == "identity" else predict_sync(relation, b)
    resid = np.abs(a - pred).max(axis=1)
    limit = tol * j
    failing = [int(n) for n in np.flatnonzero(resid > limit)]
    return {
        "relation": relation,
        "j": j,
        "tolerance": limit,
        "residuals": [float(x) for x in resid],
        "max_residual": float(resid.max()) if len(resid) else 0.0,
        "failing_steps": failing,
        "passed": not failing,
    }
