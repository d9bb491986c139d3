"""Experiment configuration: an INI-style file with sections, plus ``--set`` overrides.

Example::

    [experiment]
    kind = evolve
    engine = quantum

    [system]
    j = 400
    alpha = 0.5pi
    beta = 1/2 + 2        # resonance form r/s + delta, i.e. 4 j pi r/s + delta

    [initial]
    points = 0.7pi 0.3pi

    [run]
    steps = 40

    [output]
    dir = out/fig2
    format = csv

Angles may be written in units of pi (``0.7pi``, ``pi/2``, ``-0.25*pi``).
``beta`` is either a plain number (absolute kick strength) or ``r/s``
optionally followed by ``+ delta`` / ``- delta``. Alternatively the keys
``resonance = r/s`` and ``delta = x`` may be used, but not together with ``beta``.
"""

from __future__ import annotations

import configparser
import math
import os
import re
from dataclasses import dataclass, field, fields, replace

from .entanglement import default_workers
from .pseudo import ResonanceOffset

KINDS = ("evolve", "husimi", "entropy", "field", "portrait", "verify")
ENGINES = ("quantum", "classical", "pseudoclassical")
FORMATS = ("csv", "json")
VERIFY_TARGETS = ("gauss", "resonance", "splitting")
TOLERANCE_KEYS = ("merge", "cancel", "max_points", "compare")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


_PI_RE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")
_RES_RE = re.compile(r"^\s*(\d+)\s*/\s*(\d+)\s*(?:([+-])\s*(.+?))?\s*$")


def parse_angle(text: str, key: str = "angle") -> float:
    text = str(text).strip()
    m = _PI_RE.match(text.replace("π", "pi"))
    if m:
        coef = m.group(1)
        if coef in (None, "+", "-"):
            coef = -1.0 if coef == "-" else 1.0
        val = float(coef) * math.pi
        if m.group(2):
            val /= float(m.group(2))
        return val
    try:
        val = float(text)
    except ValueError:
        raise ConfigError(key, f"cannot read {text!r} as a number or multiple of pi") from None
    if not math.isfinite(val):
        raise ConfigError(key, "must be finite")
    return val


def parse_beta(text: str, key: str = "system.beta") -> tuple[float | None, ResonanceOffset | None]:
    m = _RES_RE.match(str(text))
    if m:
        r, s = int(m.group(1)), int(m.group(2))
        delta = 0.0
        if m.group(3):
            delta = parse_angle(m.group(4), key)
            if m.group(3) == "-":
                delta = -delta
        try:
            return None, ResonanceOffset(r, s, delta)
        except ValueError as exc:
            raise ConfigError(key, str(exc)) from None
    return parse_angle(text, key), None


def parse_points(text: str, key: str = "initial.points") -> list[tuple[float, float]]:
    pts = []
    for chunk in str(text).split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.replace(",", " ").split()
        if len(parts) != 2:
            raise ConfigError(key, f"each point needs 'theta phi', got {chunk!r}")
        pts.append((parse_angle(parts[0], key), parse_angle(parts[1], key)))
    return pts


def _int_list(text: str, key: str) -> list[int]:
    try:
        return [int(x) for x in str(text).replace(",", " ").split()]
    except ValueError:
        raise ConfigError(key, f"expected integers, got {text!r}") from None


@dataclass
class ExperimentConfig:
    kind: str
    engine: str = "quantum"
    j: int = 100
    alpha: float = math.pi / 2
    beta: float | None = 2.0
    resonance: ResonanceOffset | None = None
    points: list[tuple[float, float]] = field(default_factory=lambda: [(0.7 * math.pi, 0.3 * math.pi)])
    steps: int = 40
    tau: int = 100
    stride: int = 1
    grid_n: int = 51
    n_theta: int = 201
    n_phi: int = 201
    snapshots: list[int] = field(default_factory=lambda: [1, 2, 4, 8])
    seeds: int = 200
    seed: int = 0
    seeding: str = "grid"
    target: str = "gauss"
    r: int = 1
    s: int = 2
    out_dir: str = "out"
    fmt: str = "csv"
    workers: int = field(default_factory=default_workers)
    tolerances: dict = field(default_factory=dict)

    def validate(self) -> "ExperimentConfig":
        def need(cond, key, msg):
            if not cond:
                raise ConfigError(key, msg)

        need(self.kind in KINDS, "experiment.kind", f"must be one of {', '.join(KINDS)}")
        need(self.engine in ENGINES, "experiment.engine", f"must be one of {', '.join(ENGINES)}")
        need(isinstance(self.j, int) and self.j >= 1, "system.j", "must be a positive integer")
        need(math.isfinite(self.alpha), "system.alpha", "must be finite")
        need((self.beta is None) != (self.resonance is None), "system.beta",
             "give exactly one of an absolute beta or a resonance form")
        need(self.steps >= 0, "run.steps", "must be >= 0")
        need(self.tau >= 1, "run.tau", "must be >= 1")
        need(self.stride >= 1, "run.stride", "must be >= 1")
        need(self.grid_n >= 2, "run.grid_n", "must be >= 2")
        need(self.n_theta >= 2 and self.n_phi >= 2, "run.n_theta", "grid sizes must be >= 2")
        need(all(n >= 0 for n in self.snapshots), "run.snapshots", "must be >= 0")
        need(self.seeds >= 1, "run.seeds", "must be >= 1")
        need(self.seeding in ("grid", "random"), "run.seeding", "must be grid or random")
        need(self.target in VERIFY_TARGETS, "verify.target", f"must be one of {', '.join(VERIFY_TARGETS)}")
        need(self.s >= 1 and math.gcd(self.r, self.s) == 1, "verify.s", "r and s must be coprime with s >= 1")
        need(self.fmt in FORMATS, "output.format", "must be csv or json")
        need(self.workers >= 1, "run.workers", "must be >= 1")
        need(len(self.points) >= 1 or self.kind in ("field", "verify"), "initial.points", "at least one point required")
        for k in self.tolerances:
            need(k in TOLERANCE_KEYS, f"tolerances.{k}", f"unknown tolerance; known: {', '.join(TOLERANCE_KEYS)}")
        if self.kind == "field" or self.kind == "entropy":
            need(self.engine != "classical", "experiment.engine", "entropy needs quantum or pseudoclassical")
        if self.kind == "field":
            need(self.stride <= self.tau, "run.stride", "must not exceed tau")
        return self

    def beta_text(self) -> str:
        if self.resonance is not None:
            res = self.resonance
            sign = "-" if res.delta < 0 else "+"
            return f"{res.r}/{res.s} {sign} {abs(res.delta)!r}"
        return repr(float(self.beta))

    def to_ini(self) -> str:
        pts = "; ".join(f"{t!r} {p!r}" for t, p in self.points)
        lines = [
            "[experiment]",
            f"kind = {self.kind}",
            f"engine = {self.engine}",
            "",
            "[system]",
            f"j = {self.j}",
            f"alpha = {self.alpha!r}",
            f"beta = {self.beta_text()}",
            "",
            "[initial]",
            f"points = {pts}",
            "",
            "[run]",
            f"steps = {self.steps}",
            f"tau = {self.tau}",
            f"stride = {self.stride}",
            f"grid_n = {self.grid_n}",
            f"n_theta = {self.n_theta}",
            f"n_phi = {self.n_phi}",
            f"snapshots = {', '.join(str(n) for n in self.snapshots)}",
            f"seeds = {self.seeds}",
            f"seed = {self.seed}",
            f"seeding = {self.seeding}",
            f"workers = {self.workers}",
            "",
            "[verify]",
            f"target = {self.target}",
            f"r = {self.r}",
            f"s = {self.s}",
            "",
            "[output]",
            f"dir = {self.out_dir}",
            f"format = {self.fmt}",
        ]
        if self.tolerances:
            lines += ["", "[tolerances]"] + [f"{k} = {self.tolerances[k]!r}" for k in sorted(self.tolerances)]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["beta"] = self.beta_text()
        out.pop("resonance")
        out["points"] = [list(p) for p in self.points]
        return out


_INT_KEYS = {
    "system.j": "j", "run.steps": "steps", "run.tau": "tau", "run.stride": "stride", "run.grid_n": "grid_n",
    "run.n_theta": "n_theta", "run.n_phi": "n_phi", "run.seeds": "seeds", "run.seed": "seed",
    "run.workers": "workers", "verify.r": "r", "verify.s": "s",
}
_STR_KEYS = {
    "experiment.kind": "kind", "experiment.engine": "engine", "verify.target": "target",
    "output.dir": "out_dir", "output.format": "fmt", "run.seeding": "seeding",
}


def _strip_comment(value: str) -> str:
    return value.split("#", 1)[0].strip()


def load_config(text: str = "", overrides: list[str] | tuple[str, ...] = (), kind: str | None = None) -> ExperimentConfig:
    """Parse INI text, apply ``section.key=value`` overrides, and validate.

    ``kind`` (from the CLI subcommand) wins over ``experiment.kind`` in the file.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config", str(exc)) from None
    flat: dict[str, str] = {}
    for sec in parser.sections():
        for k, v in parser.items(sec):
            flat[f"{sec}.{k}"] = _strip_comment(v)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like section.key=value")
        k, v = item.split("=", 1)
        k = k.strip()
        if "." not in k:
            raise ConfigError(k, "override key must be section.key")
        flat[k] = v.strip()
    if kind is not None:
        flat["experiment.kind"] = kind
    if "experiment.kind" not in flat:
        raise ConfigError("experiment.kind", "missing")

    cfg = ExperimentConfig(kind=flat.pop("experiment.kind"))
    for key, attr in _STR_KEYS.items():
        if key in flat:
            setattr(cfg, attr, flat.pop(key))
    for key, attr in _INT_KEYS.items():
        if key in flat:
            try:
                setattr(cfg, attr, int(flat.pop(key)))
            except ValueError:
                raise ConfigError(key, "expected an integer") from None
    if "system.alpha" in flat:
        cfg.alpha = parse_angle(flat.pop("system.alpha"), "system.alpha")
    has_beta = "system.beta" in flat
    has_res = "system.resonance" in flat
    if has_beta and has_res:
        raise ConfigError("system.beta", "give exactly one of beta or resonance, not both")
    if has_beta:
        cfg.beta, cfg.resonance = parse_beta(flat.pop("system.beta"))
    elif has_res:
        res_text = flat.pop("system.resonance")
        delta = flat.pop("system.delta", "0")
        _, res = parse_beta(res_text, "system.resonance")
        if res is None:
            raise ConfigError("system.resonance", "expected r/s")
        cfg.beta, cfg.resonance = None, replace(res, delta=parse_angle(delta, "system.delta"))
    if "system.delta" in flat:
        raise ConfigError("system.delta", "only valid together with system.resonance")
    if "initial.points" in flat:
        cfg.points = parse_points(flat.pop("initial.points"))
    elif "initial.theta" in flat or "initial.phi" in flat:
        cfg.points = [(parse_angle(flat.pop("initial.theta", "0"), "initial.theta"),
                       parse_angle(flat.pop("initial.phi", "0"), "initial.phi"))]
    if "run.snapshots" in flat:
        cfg.snapshots = _int_list(flat.pop("run.snapshots"), "run.snapshots")
    for key in [k for k in flat if k.startswith("tolerances.")]:
        name = key.split(".", 1)[1]
        try:
            val = float(flat.pop(key))
        except ValueError:
            raise ConfigError(key, "expected a number") from None
        cfg.tolerances[name] = int(val) if name == "max_points" else val
    if flat:
        key = sorted(flat)[0]
        raise ConfigError(key, "unknown configuration key")
    return cfg.validate()


def check_output_dir(path: str) -> None:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise ConfigError("output.dir", f"cannot create {path!r}: {exc}") from None
    if not os.access(path, os.W_OK):
        raise ConfigError("output.dir", f"{path!r} is not writable")
