"""Radial pair potentials with an optional hard core and finite range.

Two built-in families are provided:

* ``shoulder_well`` (hard core at 1, divergent shoulder, tapered well)::

      u(r) = J * ((r - 1)**-alpha - (R - 1)**-alpha) - a * (R - r) / (R - 1),   1 < r <= R

  continuous with 0 at ``R``; the first bracket is non-negative, the taper lies
  in ``[-a, 0]`` so ``u >= -a >= -m``.

* ``bump`` (no hard core, used by the density-pumping experiment)::

      u(r) = h        for 0 <= r < r1
      u(r) = -w       for r1 < r <= r2
      u(r) = -w * (R - r) / (R - r2)   for r2 < r <= R

Energies use ``math.inf`` for the hard core and every consumer checks for it
before doing arithmetic, so ``inf - inf`` never occurs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

INF = math.inf

__all__ = [
    "INF",
    "PairPotential",
    "ShoulderWellTail",
    "BumpTail",
    "ZeroTail",
    "InverseTail",
    "shoulder_well",
    "bump",
    "hard_rods",
    "ideal",
    "from_spec",
    "max_interacting_neighbors",
    "rho_threshold",
]


# Tails are small picklable callables so potentials can cross process boundaries.


@dataclass(frozen=True)
class ZeroTail:
    def __call__(self, r: float) -> float:
        return 0.0

    def vec(self, r: np.ndarray) -> np.ndarray:
        return np.zeros_like(r, dtype=float)


@dataclass(frozen=True)
class InverseTail:
    """``u(r) = J / (r - 1)**alpha`` with no shift; a bare test fixture."""

    J: float = 1.0
    alpha: float = 1.0

    def __call__(self, r: float) -> float:
        return self.J / (r - 1.0) ** self.alpha

    def vec(self, r: np.ndarray) -> np.ndarray:
        return self.J / (r - 1.0) ** self.alpha


@dataclass(frozen=True)
class ShoulderWellTail:
    J: float
    alpha: float
    a: float
    R: float

    def __call__(self, r: float) -> float:
        R = self.R
        return (self.J * ((r - 1.0) ** -self.alpha - (R - 1.0) ** -self.alpha)
                - self.a * (R - r) / (R - 1.0))

    def vec(self, r: np.ndarray) -> np.ndarray:
        R = self.R
        with np.errstate(divide="ignore", over="ignore"):
            return (self.J * ((r - 1.0) ** -self.alpha - (R - 1.0) ** -self.alpha)
                    - self.a * (R - r) / (R - 1.0))


@dataclass(frozen=True)
class BumpTail:
    h: float
    w: float
    r1: float
    r2: float
    R: float

    def __call__(self, r: float) -> float:
        if r < self.r1:
            return self.h
        if r == self.r1:
            return 0.0
        if r <= self.r2:
            return -self.w
        return -self.w * (self.R - r) / (self.R - self.r2)

    def vec(self, r: np.ndarray) -> np.ndarray:
        out = np.full(r.shape, -self.w, dtype=float)
        out[r < self.r1] = self.h
        out[r == self.r1] = 0.0
        if self.R > self.r2:
            ramp = r > self.r2
            out[ramp] = -self.w * (self.R - r[ramp]) / (self.R - self.r2)
        return out


@dataclass(frozen=True)
class PairPotential:
    """Radial pair interaction ``U(s, t) = u(|s - t|)``.

    ``u(r) = inf`` for ``r <= hard_core_diameter`` (when that is positive),
    ``tail(r)`` on ``(hard_core_diameter, range]`` and ``0`` beyond ``range``.
    """

    hard_core_diameter: float
    range: float
    lower_bound: float
    tail: Any
    family: str = "custom"
    params: dict = field(default_factory=dict, compare=False)
    diverges: bool = False

    def __post_init__(self):
        if self.hard_core_diameter < 0:
            raise ValueError("hard_core_diameter must be >= 0")
        if not self.range > self.hard_core_diameter:
            raise ValueError(
                f"range R={self.range} must exceed the hard-core diameter "
                f"{self.hard_core_diameter} (finite range R > 1 for hard-core potentials)")
        if not self.lower_bound > 0:
            raise ValueError("lower_bound m must be > 0")

    def evaluate(self, r: float) -> float:
        if not r > 0:
            raise ValueError(f"pair distance must be positive, got {r}")
        return self.u(r)

    def u(self, r: float) -> float:
        """Unchecked evaluation used in inner loops (``r == 0`` counts as overlap)."""
        if r <= self.hard_core_diameter:
            return INF
        if r > self.range:
            return 0.0
        return self.tail(r)

    def evaluate_array(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=float)
        inside = (r > self.hard_core_diameter) & (r <= self.range)
        if inside.any():
            out[inside] = self.tail.vec(r[inside])
        out[r <= self.hard_core_diameter] = INF
        return out

    @property
    def has_hard_core(self) -> bool:
        return self.hard_core_diameter > 0

    def to_spec(self) -> dict:
        return {"family": self.family, **self.params}


def shoulder_well(J: float = 1.0, alpha: float = 1.0, a: float = 0.5, R: float = 2.0,
                  m: float | None = None) -> PairPotential:
    if J <= 0 or alpha < 1:
        raise ValueError("shoulder_well needs J > 0 and alpha >= 1")
    if m is None:
        m = a if a > 0 else 1.0
    if not 0 <= a <= m:
        raise ValueError("shoulder_well needs 0 <= a <= m")
    if not R > 1:
        raise ValueError(f"finite range R > 1 is required with a unit hard core, got R={R}")
    return PairPotential(1.0, R, m, ShoulderWellTail(J, alpha, a, R), "shoulder_well",
                         {"J": J, "alpha": alpha, "a": a, "R": R, "m": m}, diverges=True)


def bump(h: float = 1.0, w: float = 0.05, r1: float = 0.3, r2: float = 2.2,
         R: float | None = None, m: float | None = None) -> PairPotential:
    """No-hard-core step/well potential. ``w == 0`` switches the well off (ablation)."""
    R = r2 if R is None else R
    if not (0 < r1 < 1 / 3):
        raise ValueError("bump needs 0 < r1 < 1/3")
    if not r2 > 2:
        raise ValueError("bump needs r2 > 2")
    if R < r2:
        raise ValueError("bump needs R >= r2")
    if h <= 0 or w < 0:
        raise ValueError("bump needs h > 0 and w >= 0")
    if m is None:
        m = w if w > 0 else 1.0
    if m < w:
        raise ValueError("bump needs m >= w")
    return PairPotential(0.0, R, m, BumpTail(h, w, r1, r2, R), "bump",
                         {"h": h, "w": w, "r1": r1, "r2": r2, "R": R, "m": m})


def hard_rods(R: float = 1.5, m: float = 1.0) -> PairPotential:
    """Pure hard core of diameter 1 with a vanishing tail."""
    if not R > 1:
        raise ValueError(f"finite range R > 1 is required with a unit hard core, got R={R}")
    return PairPotential(1.0, R, m, ZeroTail(), "hard_rods", {"R": R, "m": m})


def ideal(R: float = 1.0) -> PairPotential:
    """No interaction at all (coincident points aside)."""
    return PairPotential(0.0, R, 1.0, ZeroTail(), "ideal", {"R": R})


_FAMILIES = {"shoulder_well": shoulder_well, "bump": bump, "hard_rods": hard_rods, "ideal": ideal}


def from_spec(spec: dict) -> PairPotential:
    spec = dict(spec)
    family = spec.pop("family")
    try:
        factory = _FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown potential family {family!r}") from None
    return factory(**spec)


def max_interacting_neighbors(p: PairPotential, dimension: int) -> int:
    """Packing bound ``floor((2R + 1)**n)`` on unit-separated points within ``R`` of a point.

    Balls of radius 1/2 around such points are disjoint and fit inside the
    ball of radius ``R + 1/2``.
    """
    if p.hard_core_diameter != 1.0:
        raise ValueError("neighbor bound needs a unit hard core; without one it is infinite")
    if dimension not in (1, 2, 3):
        raise ValueError("dimension must be 1, 2 or 3")
    return math.floor((2.0 * p.range + 1.0) ** dimension)


def rho_threshold(p: PairPotential, lam: float, dimension: int, rtol: float = 1e-10) -> float:
    """Separation below which a pair energy beats ``lam + i(n) * m + 1``.

    Returns the largest ``rho`` (to relative tolerance ``rtol`` on ``rho - 1``)
    such that ``u(r) > lam + i(n) * m + 1`` on ``(1, rho]``; the returned value
    itself satisfies the inequality.
    """
    if not p.has_hard_core:
        raise ValueError("rho_threshold needs a hard-core potential")
    target = lam + max_interacting_neighbors(p, dimension) * p.lower_bound + 1.0
    hc, R = p.hard_core_diameter, p.range

    def above(r):
        return p.u(r) > target

    if target < 0.0 and above(math.nextafter(R, INF)):
        raise ValueError("threshold is below the tail everywhere; no finite rho")
    # coarse scan outward from the core so the first crossing is bracketed
    lo = None
    hi = None
    for k in range(80, -1, -1):
        r = hc + (R - hc) * 2.0 ** -k
        if r <= hc:
            continue
        if above(r):
            lo = r
        else:
            hi = r
            break
    if lo is None:
        raise ValueError("tail does not diverge at the hard core")
    if hi is None:
        # exceeds the target all the way to R; beyond R the energy is 0
        return R
    while hi - lo > rtol * (lo - hc):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if above(mid):
            lo = mid
        else:
            hi = mid
    return lo
