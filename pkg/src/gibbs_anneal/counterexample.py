"""Density pumping in 1D with an attractive, no-hard-core potential.

Unit segments ``I_n = [n - 1/2, n + 1/2]``.  The sampled window is
``I_-k .. I_k``; the exterior is ``N`` pinned particles equally spaced in each
of ``I_-(k+1)`` and ``I_(k+1)``.  Pins deepen the attractive well felt inside
the window, so the expected count per segment grows with ``N``; iterating the
construction outward (pins further out pump the inner segments, which in turn
pump the centre) is what ``nested_pump`` measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .configuration import BoxRegion, Configuration
from .potential import PairPotential, bump
from .sampler import GibbsParams, MoveWeights, new_chain, run
from .stats import batch_means, weighted_slope


@dataclass(frozen=True)
class PumpExperiment:
    potential: PairPotential
    params: GibbsParams
    pins: int = 0
    half_levels: int = 0
    K: float = 1.0
    sweeps: int = 4000
    burn_fraction: float = 0.2
    sigma: float = 0.25

    def __post_init__(self):
        if self.potential.family != "bump":
            raise ValueError("density pumping needs the no-hard-core bump family")
        if self.pins < 0 or self.half_levels < 0:
            raise ValueError("pin count and window size must be >= 0")

    @property
    def window(self) -> tuple:
        k = self.half_levels
        return (-k - 0.5, k + 0.5)

    def pin_positions(self) -> tuple:
        n, k = self.pins, self.half_levels + 1
        offs = [(j + 0.5) / n - 0.5 for j in range(n)]
        right = [(k + o,) for o in offs]
        left = [(-k - o,) for o in reversed(offs)]
        return tuple(left + right)

    def box(self) -> BoxRegion:
        lo, hi = self.window
        return BoxRegion(1, (lo,), (hi,), self.pin_positions())

    def with_pins(self, pins: int) -> "PumpExperiment":
        return replace(self, pins=pins)


@dataclass(frozen=True)
class PumpResult:
    pins: int
    segments: tuple
    means: tuple
    stderr: tuple
    samples: int

    def segment(self, n: int) -> tuple:
        i = self.segments.index(n)
        return self.means[i], self.stderr[i]


def segment_counts(points, half_levels: int) -> np.ndarray:
    idx = np.clip(np.floor(np.asarray(points, float).ravel() + 0.5).astype(int),
                  -half_levels, half_levels) + half_levels
    return np.bincount(idx, minlength=2 * half_levels + 1)


def pump_expectation(exp: PumpExperiment, seed: int = 0) -> PumpResult:
    """Monte Carlo estimates of the expected count in each window segment."""
    cfg = Configuration(exp.box(), exp.potential)
    # chain id = pin count, so the same (seed, N) cell always replays the same stream
    state = new_chain(cfg, seed, exp.pins)
    w = MoveWeights(0.25, 0.25, 0.5, exp.sigma)
    burn = int(exp.sweeps * exp.burn_fraction)
    if burn:
        run(state, exp.params, w, burn)
    rows = []
    run(state, exp.params, w, exp.sweeps - burn, 1,
        lambda s: rows.append(segment_counts(s.points, exp.half_levels)))
    counts = np.asarray(rows, float)
    stats = [batch_means(counts[:, j]) for j in range(counts.shape[1])]
    k = exp.half_levels
    return PumpResult(exp.pins, tuple(range(-k, k + 1)), tuple(m for m, _ in stats),
                      tuple(s for _, s in stats), len(rows))


def pump_scan(exp: PumpExperiment, grid, seed: int = 0) -> list:
    return [pump_expectation(exp.with_pins(n), seed) for n in sorted(grid)]


def trend(results, segment: int = 0) -> tuple[float, float]:
    """Weighted slope of the segment mean against the pin count, with its standard error."""
    xs = [r.pins for r in results]
    ms, ses = zip(*(r.segment(segment) for r in results))
    return weighted_slope(xs, ms, ses)


@dataclass(frozen=True)
class ThresholdResult:
    pins: int | None
    table: tuple

    @property
    def exhausted(self) -> bool:
        return self.pins is None


def find_pump_threshold(exp: PumpExperiment, K: float, grid, seed: int = 0,
                        segments=(0,), cache: dict | None = None) -> ThresholdResult:
    """Smallest grid pin count whose estimated counts exceed ``K`` (one-sided 2 sigma) on ``segments``."""
    if not K > 0:
        raise ValueError("K must be > 0")
    cache = {} if cache is None else cache
    table = []
    for n in sorted(grid):
        key = (exp.half_levels, n, seed)
        if key not in cache:
            cache[key] = pump_expectation(exp.with_pins(n), seed)
        res = cache[key]
        table.append(res)
        if all(res.segment(s)[0] - 2 * res.segment(s)[1] > K for s in segments):
            return ThresholdResult(n, tuple(table))
    return ThresholdResult(None, tuple(table))


@dataclass(frozen=True)
class LevelReport:
    level: int
    pins: int | None
    required: float
    target_segments: tuple
    result: PumpResult | None
    centre_mean: float
    centre_se: float
    above_K: bool
    below_2K: bool
    runaway: bool


def nested_pump(exp: PumpExperiment, levels: int, K: float, grid, seed: int = 0,
                cache: dict | None = None) -> list:
    """Cascade: level 1 pins ``I_+-1`` to get ``E|w^0| > K``; level l pins ``I_+-l``
    so that ``E|w^(+-(l-1))|`` exceeds the pin count found at level ``l - 1``.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    cache = {} if cache is None else cache
    reports = []
    required = K
    for level in range(1, levels + 1):
        e = replace(exp, half_levels=level - 1)
        targets = (0,) if level == 1 else (-(level - 1), level - 1)
        th = find_pump_threshold(e, required, grid, seed, targets, cache)
        res = th.table[-1] if th.pins is not None else None
        cm, cs = res.segment(0) if res is not None else (math.nan, math.nan)
        runaway = res is not None and max(res.means) > 10 * K
        reports.append(LevelReport(level, th.pins, required, targets, res, cm, cs,
                                   bool(cm > K), bool(cm < 2 * K), runaway))
        if th.pins is None:
            break
        required = th.pins
    return reports


def default_experiment(**kw) -> PumpExperiment:
    """Shipped pumping setup."""
    p = kw.pop("potential", None) or bump(h=2.0, w=0.05, r1=0.1, r2=2.2)
    params = kw.pop("params", None) or GibbsParams(1.0, 1.0)
    return PumpExperiment(p, params, **kw)
