"""Parameter bundle shared by the engines: spin, precession angle and kick strength."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .pseudo import BranchTable, ResonanceOffset, build_branch_table
from .quantum import FloquetOperator, build_floquet, build_floquet_resonant
from .spin import SpinSpace, build_spin_space

ENGINES = ("quantum", "classical", "pseudoclassical")


@dataclass(frozen=True)
class KickedTop:
    """Kicked-top parameters with beta given either absolutely or as ``4 j pi r/s + delta``.

    An absolute beta is treated as the trivial resonance r/s = 0/1 with
    ``delta = beta``; the pseudoclassical engine then reduces to the classical map.
    """

    j: int
    alpha: float
    beta: float | None = None
    resonance: ResonanceOffset | None = None

    def __post_init__(self):
        if (self.beta is None) == (self.resonance is None):
            raise ValueError("give exactly one of an absolute beta or a resonance form")
        if self.beta is not None and not math.isfinite(self.beta):
            raise ValueError("beta must be finite")

    @property
    def offset(self) -> ResonanceOffset:
        return self.resonance if self.resonance is not None else ResonanceOffset(0, 1, float(self.beta))

    @property
    def beta_value(self) -> float:
        return float(self.beta) if self.beta is not None else self.resonance.beta(self.j)

    @property
    def delta(self) -> float:
        return self.offset.delta

    def space(self) -> SpinSpace:
        return _space(self.j)

    def floquet(self) -> FloquetOperator:
        return _floquet(self)

    def branch_table(self) -> BranchTable:
        off = self.offset
        return build_branch_table(off.r, off.s)


@lru_cache(maxsize=8)
def _space(j: int) -> SpinSpace:
    return build_spin_space(j)


@lru_cache(maxsize=16)
def _floquet(top: KickedTop) -> FloquetOperator:
    space = _space(top.j)
    if top.resonance is None:
        return build_floquet(space, top.alpha, float(top.beta))
    res = top.resonance
    return build_floquet_resonant(space, top.alpha, res.r, res.s, res.delta)
