"""Finite configurations in a box, with boundary particles and a cell list.

The energy of the particles inside the box ``A`` given the exterior is::

    H(w_A | w_ext) = sum_{i<j} U(x_i, x_j) + lam * |w_A| + sum_{i, k} U(x_i, b_k)

``Configuration`` caches the interaction part (everything but ``lam * N``) so
one object serves every chemical potential; the incremental ``delta_*``
methods use the cell list, while :func:`energy` is the all-pairs oracle.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .potential import INF, PairPotential

Point = tuple


@dataclass(frozen=True)
class BoxRegion:
    """Axis-aligned box ``A`` plus the fixed exterior configuration.

    ``boundary`` is an empty tuple for the empty boundary condition.
    """

    dimension: int
    lower: tuple
    upper: tuple
    boundary: tuple = ()

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise ValueError("dimension must be 1, 2 or 3")
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != self.dimension or len(hi) != self.dimension:
            raise ValueError("bounds do not match the dimension")
        if any(h <= l for l, h in zip(lo, hi)):
            raise ValueError("box must have positive extent along every axis")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "boundary", tuple(tuple(float(c) for c in b) for b in self.boundary))

    @classmethod
    def cube(cls, dimension: int, length: float, boundary=()) -> "BoxRegion":
        return cls(dimension, (0.0,) * dimension, (float(length),) * dimension, boundary)

    @property
    def volume(self) -> float:
        return math.prod(h - l for l, h in zip(self.lower, self.upper))

    @property
    def lengths(self) -> tuple:
        return tuple(h - l for l, h in zip(self.lower, self.upper))

    def contains(self, x) -> bool:
        return all(l <= c <= h for c, l, h in zip(x, self.lower, self.upper))

    def distance_to(self, x) -> float:
        """Euclidean distance from ``x`` to the closed box (0 inside)."""
        s = 0.0
        for c, l, h in zip(x, self.lower, self.upper):
            d = l - c if c < l else (c - h if c > h else 0.0)
            s += d * d
        return math.sqrt(s)

    def with_boundary(self, boundary) -> "BoxRegion":
        return BoxRegion(self.dimension, self.lower, self.upper, tuple(boundary))

    def validate(self, p: PairPotential) -> None:
        for b in self.boundary:
            if len(b) != self.dimension:
                raise ValueError(f"boundary point {b} has the wrong dimension")
            d = self.distance_to(b)
            if d <= 0:
                raise ValueError(f"boundary point {b} lies inside the box")
            if d > p.range:
                raise ValueError(f"boundary point {b} is farther than R={p.range} from the box")
        if p.has_hard_core and len(self.boundary) > 1:
            dmin = float(pdist(np.asarray(self.boundary)).min())
            if dmin <= p.hard_core_diameter:
                raise ValueError(
                    f"boundary points violate the hard core (min separation {dmin:.6g})")


@dataclass(frozen=True)
class Snapshot:
    """Immutable copy of a configuration, the unit passed to recorders."""

    dimension: int
    lower: tuple
    upper: tuple
    points: tuple
    boundary: tuple = ()
    sweep: int = 0
    interaction: float = 0.0

    @property
    def n(self) -> int:
        return len(self.points)

    def energy(self, lam: float) -> float:
        if math.isinf(self.interaction):
            return INF
        return self.interaction + lam * len(self.points)

    @property
    def box(self) -> BoxRegion:
        return BoxRegion(self.dimension, self.lower, self.upper, self.boundary)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "bounds": [list(self.lower), list(self.upper)],
            "points": [list(p) for p in self.points],
            "boundary_points": [list(b) for b in self.boundary],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Snapshot":
        lo, hi = obj["bounds"]
        return cls(int(obj["dimension"]), tuple(map(float, lo)), tuple(map(float, hi)),
                   tuple(tuple(map(float, p)) for p in obj["points"]),
                   tuple(tuple(map(float, b)) for b in obj.get("boundary_points", [])))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def energy(c, p: PairPotential, lam: float) -> float:
    """All-pairs evaluation of ``H(w_A | w_ext)``; the oracle for every cached value."""
    pts = np.asarray(c.points, dtype=float).reshape(-1, c.dimension) if len(c.points) else None
    if pts is None:
        return 0.0
    total = lam * len(pts)
    if len(pts) > 1:
        u = p.evaluate_array(pdist(pts))
        if np.isinf(u).any():
            return INF
        total += float(u.sum())
    if len(c.boundary):
        bnd = np.asarray(c.boundary, dtype=float).reshape(-1, c.dimension)
        u = p.evaluate_array(cdist(pts, bnd).ravel())
        if np.isinf(u).any():
            return INF
        total += float(u.sum())
    return total


RESYNC_ABOVE = 1e6


class Configuration:
    """Mutable point set in ``box`` with a cell list and cached interaction energy.

    Deletion swaps the removed point with the last one, so indices are only
    stable between deletions.
    """

    def __init__(self, box: BoxRegion, potential: PairPotential, points=(), validate: bool = True):
        if validate:
            box.validate(potential)
        self.box = box
        self.potential = potential
        self.dimension = box.dimension
        self.edge = max(potential.range, 1.0)
        self.points: list = []
        self._cell_of: list = []
        self._cells: dict = {}
        self._bcells: dict = {}
        for b in box.boundary:
            self._bcells.setdefault(self._cell(b), []).append(b)
        self._offsets = list(itertools.product((-1, 0, 1), repeat=self.dimension))
        self.interaction = 0.0
        for x in points:
            x = tuple(float(c) for c in x)
            if not box.contains(x):
                raise ValueError(f"point {x} lies outside the box")
            d = self.local_energy(x)
            self._add(x)
            self.interaction = INF if math.isinf(d) or math.isinf(self.interaction) else self.interaction + d

    # -- cell list ---------------------------------------------------------
    def _cell(self, x) -> tuple:
        e = self.edge
        return tuple(math.floor((c - l) / e) for c, l in zip(x, self.box.lower))

    def _add(self, x) -> None:
        key = self._cell(x)
        self._cells.setdefault(key, []).append(len(self.points))
        self.points.append(x)
        self._cell_of.append(key)

    def _unlink(self, i: int) -> None:
        key = self._cell_of[i]
        bucket = self._cells[key]
        bucket.remove(i)
        if not bucket:
            del self._cells[key]

    def neighbors(self, x, radius: float | None = None, skip: int = -1):
        """Indices of box points within ``radius`` (default ``R``) of ``x``."""
        radius = self.potential.range if radius is None else radius
        if radius > self.edge:
            raise ValueError("query radius exceeds the cell edge")
        out = []
        cx = self._cell(x)
        cells = self._cells
        pts = self.points
        for off in self._offsets:
            bucket = cells.get(tuple(a + b for a, b in zip(cx, off)))
            if bucket:
                for j in bucket:
                    if j != skip and math.dist(x, pts[j]) <= radius:
                        out.append(j)
        return sorted(out)

    def boundary_neighbors(self, x, radius: float | None = None):
        radius = self.potential.range if radius is None else radius
        out = []
        cx = self._cell(x)
        for off in self._offsets:
            bucket = self._bcells.get(tuple(a + b for a, b in zip(cx, off)))
            if bucket:
                out.extend(b for b in bucket if math.dist(x, b) <= radius)
        return out

    # -- energies ------------------------------------------------------------
    def local_energy(self, x, skip: int = -1) -> float:
        """Sum of ``U(x, y)`` over box points (except ``skip``) and boundary points."""
        u = self.potential.u
        R = self.potential.range
        cx = self._cell(x)
        cells, bcells, pts = self._cells, self._bcells, self.points
        total = 0.0
        for off in self._offsets:
            key = tuple(a + b for a, b in zip(cx, off))
            bucket = cells.get(key)
            if bucket:
                for j in bucket:
                    if j == skip:
                        continue
                    r = math.dist(x, pts[j])
                    if r <= R:
                        v = u(r)
                        if v == INF:
                            return INF
                        total += v
            bucket = bcells.get(key)
            if bucket:
                for b in bucket:
                    r = math.dist(x, b)
                    if r <= R:
                        v = u(r)
                        if v == INF:
                            return INF
                        total += v
        return total

    def energy(self, lam: float) -> float:
        if math.isinf(self.interaction):
            return INF
        return self.interaction + lam * len(self.points)

    def _check_inside(self, x) -> None:
        if len(x) != self.dimension or not self.box.contains(x):
            raise ValueError(f"point {x} lies outside the box")

    def delta_insert(self, x, lam: float) -> float:
        self._check_inside(x)
        e = self.local_energy(x)
        return INF if e == INF else lam + e

    def delta_delete(self, i: int, lam: float) -> float:
        if not 0 <= i < len(self.points):
            raise IndexError(f"particle index {i} out of range")
        e = self.local_energy(self.points[i], skip=i)
        return -INF if e == INF else -lam - e

    def delta_move(self, i: int, x) -> float:
        if not 0 <= i < len(self.points):
            raise IndexError(f"particle index {i} out of range")
        self._check_inside(x)
        new = self.local_energy(x, skip=i)
        if new == INF:
            return INF
        old = self.local_energy(self.points[i], skip=i)
        if old == INF:
            return -INF
        return new - old

    # -- mutation --------------------------------------------------------------
    def _bump(self, d: float) -> None:
        # huge near-core terms would wipe out the low bits of the running sum; resync instead
        if math.isinf(d) or math.isinf(self.interaction) or abs(d) > RESYNC_ABOVE:
            self.interaction = energy(self, self.potential, 0.0)
        else:
            self.interaction += d

    def insert(self, x, delta: float | None = None) -> None:
        """Add ``x``; ``delta`` is the interaction change if already known."""
        x = tuple(float(c) for c in x)
        self._check_inside(x)
        d = self.local_energy(x) if delta is None else delta
        self._add(x)
        self._bump(d)

    def delete(self, i: int, delta: float | None = None) -> None:
        if not 0 <= i < len(self.points):
            raise IndexError(f"particle index {i} out of range")
        d = -self.local_energy(self.points[i], skip=i) if delta is None else delta
        last = len(self.points) - 1
        self._unlink(i)
        if i != last:
            # move the last point into slot i
            key = self._cell_of[last]
            bucket = self._cells[key]
            bucket[bucket.index(last)] = i
            self.points[i] = self.points[last]
            self._cell_of[i] = key
        self.points.pop()
        self._cell_of.pop()
        self._bump(d)

    def move(self, i: int, x, delta: float | None = None) -> None:
        x = tuple(float(c) for c in x)
        d = self.delta_move(i, x) if delta is None else delta
        key = self._cell(x)
        if key != self._cell_of[i]:
            self._unlink(i)
            self._cells.setdefault(key, []).append(i)
            self._cell_of[i] = key
        self.points[i] = x
        self._bump(d)

    # -- misc ----------------------------------------------------------------------
    def __len__(self) -> int:
        return len(self.points)

    @property
    def boundary(self) -> tuple:
        return self.box.boundary

    def copy(self) -> "Configuration":
        new = Configuration.__new__(Configuration)
        new.box = self.box
        new.potential = self.potential
        new.dimension = self.dimension
        new.edge = self.edge
        new.points = list(self.points)
        new._cell_of = list(self._cell_of)
        new._cells = {k: list(v) for k, v in self._cells.items()}
        new._bcells = self._bcells
        new._offsets = self._offsets
        new.interaction = self.interaction
        return new

    def snapshot(self, sweep: int = 0) -> Snapshot:
        return Snapshot(self.dimension, self.box.lower, self.box.upper, tuple(self.points),
                        self.box.boundary, sweep, self.interaction)

    @classmethod
    def from_snapshot(cls, s: Snapshot, potential: PairPotential) -> "Configuration":
        return cls(s.box, potential, s.points)

    def audit(self, rtol: float = 1e-9) -> None:
        """Recompute everything from scratch and compare with the cached state."""
        ref = energy(self, self.potential, 0.0)
        if math.isinf(ref) or math.isinf(self.interaction):
            assert ref == self.interaction, (ref, self.interaction)
        else:
            assert abs(ref - self.interaction) <= rtol * max(1.0, abs(ref)), (ref, self.interaction)
        seen = sorted(j for bucket in self._cells.values() for j in bucket)
        assert seen == list(range(len(self.points)))
        for j, x in enumerate(self.points):
            assert self._cell(x) == self._cell_of[j] and j in self._cells[self._cell_of[j]]


def lattice_collar(box: BoxRegion, p: PairPotential, spacing: float, kind: str = "square",
                   offset: float = 0.0) -> tuple:
    """Lattice points lying in the open ``R``-collar just outside ``box``."""
    n = box.dimension
    R = p.range
    if kind == "square":
        basis = np.eye(n) * spacing
    elif kind == "triangular":
        if n != 2:
            raise ValueError("triangular lattice is two-dimensional")
        basis = np.array([[1.0, 0.0], [0.5, math.sqrt(3) / 2]]) * spacing
    else:
        raise ValueError(f"unknown lattice kind {kind!r}")
    lo = np.asarray(box.lower) - R
    hi = np.asarray(box.upper) + R
    span = int(math.ceil(float((hi - lo).max()) / spacing * 2)) + 2
    ks = np.array(list(itertools.product(range(-span, span + 1), repeat=n)), dtype=float)
    pts = ks @ basis + lo + offset
    keep = []
    for x in pts:
        d = box.distance_to(x)
        if 0 < d < R:
            keep.append(tuple(float(c) for c in x))
    return tuple(sorted(keep))
