"""Local-minimality search over a window, exterior held fixed.

A configuration is a ground state when no modification inside a bounded
window lowers ``H(w'_win | w_ext) - H(w_win | w_ext)``.  The continuum makes
that undecidable by enumeration, so :func:`excitation_gap` searches a finite
skeleton (deletion subsets x grid insertions) and refines candidates by a
compass descent restricted to ``r``-displacements.  PASS only means no
violation was found within the budget.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from .configuration import Configuration, energy
from .observables import grid_nodes
from .potential import INF, PairPotential, rho_threshold

GAP_TOL = 1e-6
MAX_CANDIDATES = 500_000


@dataclass(frozen=True)
class WindowTest:
    """Window ``lower..upper`` plus search budget.

    ``refine_top=None`` refines every finite discrete candidate, which makes
    ``gap`` monotone in the discrete budgets; an integer refines only the
    identity and the best ``refine_top`` candidates.
    """

    lower: tuple
    upper: tuple
    r: float
    h: float
    d_max: int = 1
    i_max: int = 1
    refine_top: int | None = 4
    tol: float = GAP_TOL
    max_candidates: int = MAX_CANDIDATES
    min_step_frac: float = 1e-4
    max_passes: int = 200

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        if not self.r > 0 or not self.h > 0:
            raise ValueError("window test needs r > 0 and h > 0")
        if self.d_max < 0 or self.i_max < 0:
            raise ValueError("budgets must be >= 0")

    @classmethod
    def centered(cls, cfg: Configuration, half_width: float, lam: float, **kw) -> "WindowTest":
        """Cubic window around the box centre with defaults tied to ``rho``."""
        c = [(l + u) / 2 for l, u in zip(cfg.box.lower, cfg.box.upper)]
        p = cfg.potential
        if p.diverges:
            gap = rho_threshold(p, lam, cfg.dimension) - p.hard_core_diameter
            kw.setdefault("r", gap / 2)
            kw.setdefault("h", gap / 4)
        return cls(tuple(v - half_width for v in c), tuple(v + half_width for v in c), **kw)

    def contains(self, x) -> bool:
        return all(l <= v <= u for v, l, u in zip(x, self.lower, self.upper))

    def validate(self, cfg: Configuration, lam: float) -> None:
        R = cfg.potential.range
        if len(self.lower) != cfg.dimension:
            raise ValueError("window dimension does not match the configuration")
        for l, u, bl, bu in zip(self.lower, self.upper, cfg.box.lower, cfg.box.upper):
            if not u > l:
                raise ValueError("window must have positive extent")
            if l - R < bl - 1e-12 or u + R > bu + 1e-12:
                raise ValueError("window plus its R-collar must lie inside the box")
        p = cfg.potential
        if p.has_hard_core and p.diverges:
            limit = (rho_threshold(p, lam, cfg.dimension) - p.hard_core_diameter) / 2
            if self.r > limit * (1 + 1e-9):
                raise ValueError(f"r={self.r} exceeds (rho - 1)/2 = {limit:.6g}")


@dataclass(frozen=True)
class ExcitationReport:
    gap: float
    window_points: tuple
    deleted: tuple
    inserted: tuple
    refined: bool
    searched: int
    verdict: str
    discrete_gap: float
    tol: float

    def to_json(self) -> dict:
        return {
            "gap": self.gap,
            "discrete_gap": self.discrete_gap,
            "verdict": self.verdict,
            "tol": self.tol,
            "searched": self.searched,
            "refined": self.refined,
            "deleted": [list(p) for p in self.deleted],
            "inserted": [list(p) for p in self.inserted],
            "window_points": [list(p) for p in self.window_points],
        }


def _split(cfg: Configuration, test: WindowTest):
    inside = [i for i, x in enumerate(cfg.points) if test.contains(x)]
    s = set(inside)
    outside = [x for i, x in enumerate(cfg.points) if i not in s]
    return inside, outside


def perturbed_points(cfg: Configuration, test: WindowTest, window_points) -> list:
    """Full point list with the window contents replaced."""
    _, outside = _split(cfg, test)
    return list(outside) + [tuple(p) for p in window_points]


def reverify(cfg: Configuration, test: WindowTest, report: ExcitationReport, lam: float) -> float:
    """Gap of the stored perturbation recomputed with the all-pairs oracle."""
    new = Configuration(cfg.box, cfg.potential, perturbed_points(cfg, test, report.window_points),
                        validate=False)
    return energy(new, cfg.potential, lam) - energy(cfg, cfg.potential, lam)


def _descend(work: Configuration, movable: list, starts: list, test: WindowTest) -> float:
    """Compass search on the movable points; returns the accumulated energy change."""
    r = test.r
    step = r / 2
    min_step = r * test.min_step_frac
    dim = work.dimension
    total = 0.0
    passes = 0
    while step > min_step and passes < test.max_passes:
        passes += 1
        improved = False
        for j, s in zip(movable, starts):
            for axis in range(dim):
                for sign in (1.0, -1.0):
                    x = list(work.points[j])
                    x[axis] += sign * step
                    x = tuple(x)
                    if not test.contains(x) or math.dist(x, s) >= r:
                        continue
                    d = work.delta_move(j, x)
                    if d < -1e-14:
                        work.move(j, x, d)
                        total += d
                        improved = True
                        break
        if not improved:
            step /= 2
    return total


def _budget(nw: int, m: int, d_max: int, i_max: int) -> int:
    dels = sum(math.comb(nw, d) for d in range(min(d_max, nw) + 1))
    ins = sum(math.comb(m, i) for i in range(min(i_max, m) + 1))
    return dels * ins


def excitation_gap(cfg: Configuration, test: WindowTest, lam: float) -> ExcitationReport:
    """Most negative relative-energy change found inside the window."""
    test.validate(cfg, lam)
    if math.isinf(cfg.interaction):
        raise ValueError("excitation_gap needs a finite-energy configuration")
    p = cfg.potential
    dim = cfg.dimension
    R = p.range
    inside, outside = _split(cfg, test)
    W = np.asarray([cfg.points[i] for i in inside], float).reshape(-1, dim)
    ctx = [x for x in outside if _near(x, test, R)] + [b for b in cfg.boundary if _near(b, test, R)]
    C = np.asarray(ctx, float).reshape(-1, dim)
    nodes = grid_nodes(test.lower, test.upper, test.h)
    nw, m = len(W), len(nodes)
    budget = _budget(nw, m, test.d_max, test.i_max)
    if budget > test.max_candidates:
        raise ValueError(
            f"search budget {budget} exceeds the cap {test.max_candidates}; "
            f"increase the grid pitch h (now {test.h}), lower i_max/d_max or shrink the window")

    P = squareform(p.evaluate_array(pdist(W))) if nw > 1 else np.zeros((nw, nw))
    UWC = p.evaluate_array(cdist(W, C)) if len(C) and nw else np.zeros((nw, len(C)))
    e = P.sum(axis=1) + UWC.sum(axis=1)
    UGC = p.evaluate_array(cdist(nodes, C)) if len(C) else np.zeros((m, 0))
    base_blocked = np.isinf(UGC).any(axis=1)
    base = np.where(base_blocked, 0.0, UGC.sum(axis=1))
    UGW = p.evaluate_array(cdist(nodes, W)) if nw else np.zeros((m, 0))
    blocked_by = np.isinf(UGW)
    FGW = np.where(blocked_by, 0.0, UGW)

    cands = []  # (gap, deleted tuple, inserted tuple)
    for d in range(min(test.d_max, nw) + 1):
        for D in itertools.combinations(range(nw), d):
            Dl = list(D)
            gdel = -lam * d - float(e[Dl].sum()) + sum(P[a, b] for a, b in itertools.combinations(D, 2))
            keep = np.ones(nw, bool)
            keep[Dl] = False
            feasible = ~base_blocked & ~blocked_by[:, keep].any(axis=1)
            ins1 = lam + base + FGW[:, keep].sum(axis=1)
            cands.append((gdel, D, ()))
            idx = np.flatnonzero(feasible)
            if test.i_max >= 1:
                for k in idx.tolist():
                    cands.append((gdel + float(ins1[k]), D, (k,)))
            for size in range(2, min(test.i_max, len(idx)) + 1):
                for combo in itertools.combinations(idx.tolist(), size):
                    pair = p.evaluate_array(pdist(nodes[list(combo)]))
                    if np.isinf(pair).any():
                        continue
                    cands.append((gdel + float(ins1[list(combo)].sum() + pair.sum()), D, combo))

    cands.sort(key=lambda c: (c[0], c[1], c[2]))
    discrete_best = cands[0]
    if test.refine_top is None:
        chosen = cands
    else:
        chosen = cands[: test.refine_top]
        if not any(c[1] == () and c[2] == () for c in chosen):
            chosen = chosen + [(0.0, (), ())]

    outside_pts = list(outside)
    # ranking key: gap, then lexicographic encoding, refined before unrefined
    best = (discrete_best[0], discrete_best[1], discrete_best[2], 1, None)
    for gap0, D, I in chosen:
        start = [tuple(W[j]) for j in range(nw) if j not in D] + [tuple(nodes[k]) for k in I]
        if not start:
            continue
        work = Configuration(cfg.box, p, outside_pts + start, validate=False)
        n0 = len(outside_pts)
        change = _descend(work, list(range(n0, n0 + len(start))), start, test)
        cand = (gap0 + change, D, I, 0, tuple(work.points[n0:]))
        if cand[:4] < best[:4]:
            best = cand

    g, D, I, flag, moved = best
    refined = flag == 0
    if moved is None:
        moved = tuple([tuple(W[j]) for j in range(nw) if j not in D] + [tuple(nodes[k]) for k in I])
    verdict = "FAIL" if g < -test.tol else "PASS"
    return ExcitationReport(
        gap=float(g),
        window_points=tuple(tuple(float(c) for c in x) for x in moved),
        deleted=tuple(tuple(float(c) for c in W[j]) for j in D),
        inserted=tuple(tuple(float(c) for c in nodes[k]) for k in I),
        refined=refined,
        searched=len(cands) + len(chosen),
        verdict=verdict,
        discrete_gap=float(discrete_best[0]),
        tol=test.tol,
    )


def _near(x, test: WindowTest, R: float) -> bool:
    s = 0.0
    for c, l, u in zip(x, test.lower, test.upper):
        d = l - c if c < l else (c - u if c > u else 0.0)
        s += d * d
    return s <= R * R


def _ball(rng: np.random.Generator, dim: int, r: float) -> np.ndarray:
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    return v * r * rng.random() ** (1.0 / dim)


def r_perturbations(cfg: Configuration, test: WindowTest, r: float, samples: int,
                    rng: np.random.Generator, antithetic: bool = False, max_tries: int = 1000):
    """Yield configurations where each window particle moves uniformly within distance ``r``.

    Draws that break the hard core or leave the window are redrawn.  With
    ``antithetic`` every draw is followed by its mirror image.
    """
    if not r > 0:
        raise ValueError("r must be > 0")
    inside, outside = _split(cfg, test)
    W = np.asarray([cfg.points[i] for i in inside], float).reshape(-1, cfg.dimension)
    produced = 0
    while produced < samples:
        for _ in range(max_tries):
            delta = np.stack([_ball(rng, cfg.dimension, r) for _ in range(len(W))]) if len(W) else W
            signs = (1.0, -1.0) if antithetic else (1.0,)
            outs = []
            for sgn in signs:
                moved = [tuple(x) for x in (W + sgn * delta).tolist()]
                if not all(test.contains(x) for x in moved):
                    break
                new = Configuration(cfg.box, cfg.potential, list(outside) + moved, validate=False)
                if math.isinf(new.interaction):
                    break
                outs.append(new)
            if len(outs) == len(signs):
                break
        else:
            raise RuntimeError("could not draw a feasible r-perturbation")
        for new in outs:
            if produced < samples:
                produced += 1
                yield new


@dataclass(frozen=True)
class GapSummary:
    n: int
    fail_fraction: float
    fail_count: int
    mean_gap: float
    gaps: tuple
    hist_counts: tuple
    hist_edges: tuple
    threshold: float


GAP_BINS = (-1e300, -10.0, -3.0, -1.0, -0.3, -0.1, -0.01, -GAP_TOL, 1e300)


def gap_statistics(samples, test: WindowTest, p: PairPotential, lam: float,
                   threshold: float | None = None) -> GapSummary:
    """FAIL fraction (gap below ``-threshold``, default the test tolerance), mean gap, histogram."""
    thr = test.tol if threshold is None else threshold
    gaps = []
    for s in samples:
        cfg = s if isinstance(s, Configuration) else Configuration(s.box, p, s.points)
        gaps.append(excitation_gap(cfg, test, lam).gap)
    n = len(gaps)
    fails = sum(g < -thr for g in gaps)
    counts, _ = np.histogram(np.clip(gaps, -1e299, 1e299), bins=np.array(GAP_BINS))
    return GapSummary(n, fails / n if n else 0.0, fails, float(np.mean(gaps)) if n else 0.0,
                      tuple(gaps), tuple(int(c) for c in counts), GAP_BINS, thr)
