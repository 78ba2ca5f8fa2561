"""Grand-canonical Metropolis-Hastings on a box with a fixed exterior.

The target law has density ``exp(-beta * H(w_A | w_ext))`` with respect to the
unit-intensity Poisson process on ``A``.  Acceptance probabilities for the
three moves (``V = |A|``, ``N`` the current count, ``p_ins``/``p_del`` the
proposal weights)::

    insert uniform x      min(1, p_del/p_ins * V/(N+1) * exp(-beta dH))
    delete uniform point  min(1, p_ins/p_del * N/V     * exp(-beta dH))
    displace (symmetric)  min(1, exp(-beta dH))

Any ``dH == inf`` is rejected outright, including at ``beta == 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .configuration import BoxRegion, Configuration, Snapshot, energy
from .potential import INF, PairPotential, rho_threshold

MOVES = ("insert", "delete", "move")


@dataclass(frozen=True)
class GibbsParams:
    """Inverse temperature and chemical potential; ``lam * N`` is added to ``H``."""

    beta: float
    lam: float = 0.0

    def __post_init__(self):
        if not (self.beta >= 0 and math.isfinite(self.beta)):
            raise ValueError("beta must be finite and >= 0")
        if not math.isfinite(self.lam):
            raise ValueError("lam must be finite")


@dataclass(frozen=True)
class MoveWeights:
    insert: float = 0.25
    delete: float = 0.25
    move: float = 0.5
    sigma: float = 0.1

    def __post_init__(self):
        ws = (self.insert, self.delete, self.move)
        if min(ws) < 0 or abs(sum(ws) - 1.0) > 1e-12:
            raise ValueError("move weights must be >= 0 and sum to 1")
        if (self.insert > 0) != (self.delete > 0):
            raise ValueError("insert and delete must both be enabled or both disabled")
        if not self.sigma > 0:
            raise ValueError("displacement scale must be > 0")

    @classmethod
    def default(cls, p: PairPotential, lam: float, dimension: int) -> "MoveWeights":
        """Balanced weights; the displacement scale is half the close-pair gap ``rho - 1``."""
        if p.has_hard_core and p.diverges:
            sigma = 0.5 * (rho_threshold(p, lam, dimension) - p.hard_core_diameter)
        else:
            sigma = 0.25
        return cls(0.25, 0.25, 0.5, sigma)


@dataclass
class ChainState:
    config: Configuration
    rng: np.random.Generator
    chain: int = 0
    sweep: int = 0
    proposed: dict = field(default_factory=lambda: dict.fromkeys(MOVES, 0))
    accepted: dict = field(default_factory=lambda: dict.fromkeys(MOVES, 0))
    n_sum: float = 0.0
    n_obs: int = 0

    @property
    def mean_n(self) -> float:
        return self.n_sum / self.n_obs if self.n_obs else float(len(self.config))

    def acceptance(self) -> dict:
        return {m: (self.accepted[m] / self.proposed[m] if self.proposed[m] else 0.0) for m in MOVES}


def chain_rng(seed: int, chain: int = 0) -> np.random.Generator:
    """Counter-based Philox stream keyed by ``(seed, chain)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chain,))))


def new_chain(config: Configuration, seed: int, chain: int = 0) -> ChainState:
    return ChainState(config, chain_rng(seed, chain), chain)


def _propose(s: ChainState, g: GibbsParams, w: MoveWeights, u, audit: bool) -> None:
    cfg = s.config
    box = cfg.box
    n = len(cfg.points)
    dim = cfg.dimension
    beta, lam = g.beta, g.lam
    u0 = u[0]
    if u0 < w.insert:
        kind = "insert"
        s.proposed[kind] += 1
        x = tuple(l + (h - l) * c for l, h, c in zip(box.lower, box.upper, u[3:3 + dim]))
        dh = cfg.delta_insert(x, lam)
        log_ratio = math.log(w.delete / w.insert * box.volume / (n + 1))
    elif u0 < w.insert + w.delete:
        kind = "delete"
        s.proposed[kind] += 1
        if n == 0:
            return
        i = min(int(u[1] * n), n - 1)
        dh = cfg.delta_delete(i, lam)
        log_ratio = math.log(w.insert / w.delete * n / box.volume)
    else:
        kind = "move"
        s.proposed[kind] += 1
        if n == 0:
            return
        i = min(int(u[1] * n), n - 1)
        sig = w.sigma
        x = tuple(c + sig * (2.0 * v - 1.0) for c, v in zip(cfg.points[i], u[3:3 + dim]))
        if not box.contains(x):
            return
        dh = cfg.delta_move(i, x)
        log_ratio = 0.0
    if dh == INF:
        return
    if dh != -INF:
        a = log_ratio - beta * dh
        if a < 0.0 and u[2] >= math.exp(a):
            return
    s.accepted[kind] += 1
    lam_part = lam if kind == "insert" else (-lam if kind == "delete" else 0.0)
    d_int = dh - lam_part if math.isfinite(dh) else None
    if kind == "insert":
        cfg.insert(x, d_int)
        moved = len(cfg.points) - 1
    elif kind == "delete":
        cfg.delete(i, d_int)
        moved = -1
    else:
        cfg.move(i, x, d_int)
        moved = i
    if audit and moved >= 0 and cfg.potential.has_hard_core:
        close = cfg.neighbors(cfg.points[moved], radius=cfg.potential.hard_core_diameter, skip=moved)
        assert not close, "accepted move violates the hard core"


def step(s: ChainState, g: GibbsParams, w: MoveWeights, audit: bool = False) -> ChainState:
    """Execute one proposal in place and return the state."""
    u = s.rng.random(3 + s.config.dimension).tolist()
    _propose(s, g, w, u, audit)
    return s


def run(s: ChainState, g: GibbsParams, w: MoveWeights, sweeps: int, thin: int = 1,
        sink: Callable[[Snapshot], None] | None = None, audit: bool = False) -> ChainState:
    """Run ``sweeps`` sweeps of ``round(mean N) + 1`` proposals each.

    ``sink`` receives a snapshot every ``thin`` sweeps.
    """
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    if thin < 1:
        raise ValueError("thin must be >= 1")
    width = 3 + s.config.dimension
    rng = s.rng
    for k in range(1, sweeps + 1):
        n_steps = int(round(s.mean_n)) + 1
        for u in rng.random((n_steps, width)).tolist():
            _propose(s, g, w, u, audit)
        s.sweep += 1
        s.n_sum += len(s.config.points)
        s.n_obs += 1
        if sink is not None and k % thin == 0:
            sink(s.config.snapshot(s.sweep))
    return s


PARTITION_VOLUME_CAP = 10.0


def conditional_partition_estimate(box: BoxRegion, g: GibbsParams, p: PairPotential,
                                   samples: int, rng: np.random.Generator | None = None,
                                   cap: float = PARTITION_VOLUME_CAP) -> tuple[float, float]:
    """Plain Monte Carlo estimate of ``Z = E_pi[exp(-beta H)]`` and its standard error.

    Only meant as a test oracle for tiny boxes; refuses ``|A| > cap``.
    """
    if box.volume > cap:
        raise ValueError(f"box volume {box.volume} exceeds the cap {cap}; variance would explode")
    rng = np.random.default_rng(0) if rng is None else rng
    lo, hi = np.asarray(box.lower), np.asarray(box.upper)
    vals = np.empty(samples)
    for t in range(samples):
        k = rng.poisson(box.volume)
        pts = lo + (hi - lo) * rng.random((k, box.dimension))
        snap = Snapshot(box.dimension, box.lower, box.upper, tuple(map(tuple, pts)), box.boundary)
        h = energy(snap, p, g.lam)
        vals[t] = 0.0 if h == INF else math.exp(-g.beta * h)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
