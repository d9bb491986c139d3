"""Plot-ready CSV/JSON writers and readers.

All floats are written with 17 significant digits so that files round-trip
exactly and identical runs produce byte-identical output.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    x = float(x)
    if np.isnan(x):
        return "nan"
    return f"{x:.17g}"


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_json(obj) -> str:
    # NaN is not valid JSON; missing values become null
    return json.dumps(_nan_to_none(obj), indent=2, sort_keys=True, default=_json_default, allow_nan=False) + "\n"


def _nan_to_none(obj):
    if isinstance(obj, float) and obj != obj:
        return None
    if isinstance(obj, dict):
        return {k: _nan_to_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_nan_to_none(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _nan_to_none(obj.tolist())
    return obj


def rows_to_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, (str, int)) else fmt(c) for c in row])
    return buf.getvalue()


def trace_csv(trace: np.ndarray) -> str:
    return rows_to_csv(["step", "jx", "jy", "jz"], ([n, *row] for n, row in enumerate(trace)))


def trace_json(trace: np.ndarray, meta: dict | None = None) -> str:
    return dumps_json({**(meta or {}), "steps": len(trace), "jx": trace[:, 0], "jy": trace[:, 1], "jz": trace[:, 2]})


def read_trace(path: str | Path) -> np.ndarray:
    path = Path(path)
    if path.suffix == ".json":
        data = json.loads(path.read_text())
        return np.column_stack([data["jx"], data["jy"], data["jz"]]).astype(float)
    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    return np.array([[float(r["jx"]), float(r["jy"]), float(r["jz"])] for r in rows])


def husimi_csv(grid) -> str:
    """Header row: theta nodes. Each following row: a phi node, then P(theta_a, phi) for every a."""
    return rows_to_csv(
        ["phi\\theta", *(fmt(t) for t in grid.theta_nodes)],
        ([ph, *grid.values[:, b]] for b, ph in enumerate(grid.phi_nodes)),
    )


def husimi_json(grid, meta: dict | None = None) -> str:
    return dumps_json({
        **(meta or {}),
        "theta_nodes": grid.theta_nodes,
        "phi_nodes": grid.phi_nodes,
        "shape": [grid.n_theta, grid.n_phi],
        "values": grid.values.ravel(),  # row-major, theta index slowest
    })


def read_husimi_csv(path: str | Path):
    with Path(path).open() as fh:
        rows = list(csv.reader(fh))
    thetas = np.array([float(x) for x in rows[0][1:]])
    phis = np.array([float(r[0]) for r in rows[1:]])
    values = np.array([[float(x) for x in r[1:]] for r in rows[1:]]).T
    return thetas, phis, values


def points_csv(snapshots) -> str:
    """``snapshots`` is a sequence of WeightedPointSet, one per step."""
    rows = []
    for n, pts in enumerate(snapshots):
        for t, p, a in zip(pts.theta, pts.phi, pts.amp):
            rows.append([n, t, p, a.real, a.imag])
    return rows_to_csv(["step", "theta", "phi", "re_amp", "im_amp"], rows)


def points_json(snapshots, meta: dict | None = None) -> str:
    return dumps_json({
        **(meta or {}),
        "snapshots": [
            {"step": n, "theta": s.theta, "phi": s.phi, "re_amp": s.amp.real, "im_amp": s.amp.imag}
            for n, s in enumerate(snapshots)
        ],
    })


def portrait_csv(trajectories) -> str:
    rows = []
    for i, tr in enumerate(trajectories):
        for n, p in enumerate(tr.points):
            rows.append([i, n, p.theta, p.phi])
    return rows_to_csv(["trajectory", "step", "theta", "phi"], rows)


def portrait_json(trajectories, meta: dict | None = None) -> str:
    return dumps_json({
        **(meta or {}),
        "trajectories": [{"theta": [p.theta for p in t.points], "phi": [p.phi for p in t.points]} for t in trajectories],
    })


def matrix_csv(values: np.ndarray) -> str:
    return rows_to_csv([f"c{k}" for k in range(values.shape[1])], values.tolist())


def read_matrix_csv(path: str | Path) -> np.ndarray:
    with Path(path).open() as fh:
        rows = list(csv.reader(fh))[1:]
    return np.array([[float(x) for x in r] for r in rows])


def field_sidecar(field) -> dict:
    top = field.top
    return {
        "theta_nodes": field.theta_nodes,
        "phi_nodes": field.phi_nodes,
        "tau": field.tau,
        "stride": field.stride,
        "engine": field.engine,
        "params": {"j": top.j, "alpha": top.alpha, "beta": top.beta_value, "delta": top.delta,
                   "r": top.offset.r, "s": top.offset.s},
        "layout": "rows are theta nodes, columns are phi nodes",
    }


def write_text(path: Path, text: str) -> str:
    """Write and return the sha256 digest of the bytes written."""
    data = text.encode()
    path.write_bytes(data)
    return hashlib.sha256(data).hexdigest()
