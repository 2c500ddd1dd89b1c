"""Variables, transform parameters and convergence regions.

The function domain has four variables q, r, s, t (indices 0..3).  Each
variable is bound to a fixed pair of transform parameters:

    q <-> (h, m),   r <-> (j, n),   s <-> (k, o),   t <-> (l, p)

The first element of a pair multiplies the variable in the kernel exponent
(-h*q/m); the second scales it.  All eight parameters are strictly positive.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import RegionError

VAR_NAMES = ("q", "r", "s", "t")
PARAM_NAMES = ("h", "j", "k", "l")
MATE_NAMES = ("m", "n", "o", "p")
ALL_VARS = (0, 1, 2, 3)

VAR_INDEX = {name: i for i, name in enumerate(VAR_NAMES)}
PARAM_INDEX = {name: i for i, name in enumerate(PARAM_NAMES)}
MATE_INDEX = {name: i for i, name in enumerate(MATE_NAMES)}


def var_name(v: int) -> str:
    return VAR_NAMES[v]


def normalize_vars(vars_) -> tuple:
    """Normalize a variable subset given as indices or letters to a sorted tuple."""
    if vars_ is None:
        return ALL_VARS
    out = set()
    for v in vars_:
        if isinstance(v, str):
            if v not in VAR_INDEX:
                raise ValueError(f"unknown variable {v!r}")
            out.add(VAR_INDEX[v])
        else:
            if v not in (0, 1, 2, 3):
                raise ValueError(f"variable index out of range: {v}")
            out.add(v)
    if not out:
        raise ValueError("variable set must be nonempty")
    return tuple(sorted(out))


@dataclass(frozen=True)
class ShehuPoint:
    """A positive assignment of the eight transform parameters."""

    h: float
    j: float
    k: float
    l: float
    m: float
    n: float
    o: float
    p: float

    def __post_init__(self):
        for name in ("h", "j", "k", "l", "m", "n", "o", "p"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"parameter {name} must be strictly positive")

    def param(self, v: int) -> float:
        return (self.h, self.j, self.k, self.l)[v]

    def mate(self, v: int) -> float:
        return (self.m, self.n, self.o, self.p)[v]

    def ratio(self, v: int) -> float:
        """param/mate for the pair bound to variable v."""
        return self.param(v) / self.mate(v)

    def as_dict(self) -> dict:
        return {
            "h": self.h, "j": self.j, "k": self.k, "l": self.l,
            "m": self.m, "n": self.n, "o": self.o, "p": self.p,
        }

    def __str__(self):
        return ",".join(f"{k}={v:.6g}" for k, v in self.as_dict().items())


@dataclass(frozen=True)
class ConvergenceRegion:
    """Constraints param > rate * mate per variable, from an exponential-order bound."""

    rates: tuple  # (a, b, c, d)

    def contains(self, point: ShehuPoint) -> bool:
        return all(point.param(v) > self.rates[v] * point.mate(v) for v in ALL_VARS)

    def margin(self, point: ShehuPoint) -> float:
        """Smallest decay rate param/mate - rate across the four axes."""
        return min(point.ratio(v) - self.rates[v] for v in ALL_VARS)

    def require(self, point: ShehuPoint, margin: float = 0.0):
        got = self.margin(point)
        if got <= margin:
            raise RegionError(
                f"point outside convergence region (decay margin {got:.4g}, "
                f"required > {margin:.4g})"
            )

    def constraints(self) -> list:
        return [
            f"{PARAM_NAMES[v]} > {self.rates[v]:.6g}*{MATE_NAMES[v]}"
            for v in ALL_VARS
        ]


def sample_point(rng: random.Random, rates=(0.0, 0.0, 0.0, 0.0),
                 margin_lo: float = 0.25, margin_span: float = 2.0) -> ShehuPoint:
    """Draw a ShehuPoint strictly inside the region for the given growth rates.

    Mates are drawn in [0.6, 1.8]; each param is mate*(rate + margin) with the
    decay margin uniform in [margin_lo, margin_lo + margin_span].  Deterministic
    for a fixed rng state.
    """
    vals = []
    mates = []
    for v in ALL_VARS:
        mate = rng.uniform(0.6, 1.8)
        decay = margin_lo + rng.uniform(0.0, margin_span)
        vals.append(mate * (max(rates[v], 0.0) + decay))
        mates.append(mate)
    return ShehuPoint(vals[0], vals[1], vals[2], vals[3],
                      mates[0], mates[1], mates[2], mates[3])
