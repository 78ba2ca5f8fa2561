"""Diagnostics on configurations: separations, Delone radii, local density.

All functions accept anything with ``dimension``, ``lower``/``upper`` (or a
``box``), ``points`` and ``boundary`` attributes, i.e. a ``Snapshot`` or a live
``Configuration``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist, pdist

from .potential import INF, PairPotential, max_interacting_neighbors
from .stats import batch_means_columns


def _bounds(c):
    if hasattr(c, "lower"):
        return np.asarray(c.lower, float), np.asarray(c.upper, float)
    return np.asarray(c.box.lower, float), np.asarray(c.box.upper, float)


def _points(c) -> np.ndarray:
    return np.asarray(c.points, dtype=float).reshape(-1, c.dimension)


def min_separation(c) -> float:
    """Smallest distance between two particles of ``c`` (``inf`` below two particles).

    Binning with a density-derived edge gives the exact answer whenever the
    minimum is below the edge; otherwise falls back to all pairs.
    """
    pts = _points(c)
    n = len(pts)
    if n < 2:
        return INF
    lo, hi = _bounds(c)
    edge = max((float(np.prod(hi - lo)) / n) ** (1.0 / c.dimension), 1e-9)
    cells = {}
    for j, key in enumerate(map(tuple, np.floor((pts - lo) / edge).astype(int).tolist())):
        cells.setdefault(key, []).append(j)
    best = INF
    rows = pts.tolist()
    offsets = list(itertools.product((-1, 0, 1), repeat=c.dimension))
    for key, bucket in cells.items():
        for off in offsets:
            other = cells.get(tuple(a + b for a, b in zip(key, off)))
            if not other:
                continue
            for i in bucket:
                xi = rows[i]
                for j in other:
                    if j > i:
                        d = math.dist(xi, rows[j])
                        if d < best:
                            best = d
    if best <= edge:
        return best
    # recompute the winning pair with math.dist so both paths round identically
    k = int(np.argmin(pdist(pts)))
    i = int(n - 2 - math.floor(math.sqrt(-8 * k + 4 * n * (n - 1) - 7) / 2 - 0.5))
    j = int(k + i + 1 - n * (n - 1) // 2 + (n - i) * ((n - i) - 1) // 2)
    return math.dist(rows[i], rows[j])


def boundary_separation(c) -> float:
    """Smallest distance between a particle and a boundary particle."""
    pts = _points(c)
    if not len(pts) or not len(c.boundary):
        return INF
    return float(cdist(pts, np.asarray(c.boundary, dtype=float)).min())


def is_bad(c, rho: float, include_boundary: bool = True) -> bool:
    """Two particles closer than ``rho``, or (optionally) one closer than ``rho`` to the boundary."""
    if min_separation(c) < rho:
        return True
    return include_boundary and boundary_separation(c) < rho


def bad_event_fraction(samples, rho: float, include_boundary: bool = True) -> float:
    samples = list(samples)
    if not samples:
        return 0.0
    return sum(is_bad(s, rho, include_boundary) for s in samples) / len(samples)


def grid_nodes(lower, upper, pitch: float, trim: float = 0.0) -> np.ndarray:
    """Regular grid of pitch ``pitch`` over the box shrunk by ``trim`` on every side."""
    if not pitch > 0:
        raise ValueError("grid pitch must be > 0")
    axes = []
    for l, h in zip(lower, upper):
        a, b = l + trim, h - trim
        if b < a:
            raise ValueError("trim leaves an empty box")
        k = int(math.floor((b - a) / pitch + 1e-9))
        axes.append(a + pitch * np.arange(k + 1))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True)
class DeloneRadii:
    packing: float
    covering: float
    grid_error: float


def delone_radii(c, grid_pitch: float, trim: float = 0.0) -> DeloneRadii:
    """Packing radius (min separation) and grid estimate of the covering radius.

    The covering estimate is the largest nearest-particle distance over the
    grid nodes; it is within ``grid_pitch * sqrt(n) / 2`` of the true value
    over the trimmed box. Boundary particles count as particles here.
    """
    pts = _points(c)
    if not len(pts):
        raise ValueError("delone_radii needs a nonempty configuration")
    lo, hi = _bounds(c)
    allpts = pts if not len(c.boundary) else np.vstack([pts, np.asarray(c.boundary, float)])
    nodes = grid_nodes(lo, hi, grid_pitch, trim)
    dist, _ = cKDTree(allpts).query(nodes)
    return DeloneRadii(min_separation(c), float(dist.max()),
                       grid_pitch * math.sqrt(c.dimension) / 2)


@dataclass(frozen=True)
class DensityField:
    """Mean number of particles in the radius-1 ball around each node."""

    nodes: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_samples: int


def unit_ball_volume(dimension: int) -> float:
    return math.pi ** (dimension / 2) / math.gamma(dimension / 2 + 1)


def unit_ball_counts(c, nodes: np.ndarray, radius: float = 1.0) -> np.ndarray:
    pts = _points(c)
    if not len(pts):
        return np.zeros(len(nodes))
    tree = cKDTree(pts)
    return np.asarray(tree.query_ball_point(nodes, radius, return_length=True), dtype=float)


def density_field(samples, grid_pitch: float, trim: float = 1.0, radius: float = 1.0,
                  box=None) -> DensityField:
    """Sample means of unit-ball counts on a grid (nodes trimmed so balls sit inside the box)."""
    samples = list(samples)
    if box is None:
        if not samples:
            raise ValueError("need samples or an explicit box")
        box = samples[0]
    lo, hi = _bounds(box)
    nodes = grid_nodes(lo, hi, grid_pitch, trim)
    if not samples:
        z = np.zeros(len(nodes))
        return DensityField(nodes, z, z.copy(), 0)
    counts = np.stack([unit_ball_counts(s, nodes, radius) for s in samples])
    mean, se = batch_means_columns(counts)
    return DensityField(nodes, mean, se, len(samples))


def density_cap(p: PairPotential, dimension: int) -> int:
    """Upper bound on any unit-ball count for a unit hard core."""
    return max_interacting_neighbors(p, dimension) + 1
