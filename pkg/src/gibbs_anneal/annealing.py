"""Inverse-temperature ladders over one or many independent chains."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .configuration import Configuration, Snapshot
from .ground_state import WindowTest, excitation_gap
from .observables import is_bad, min_separation
from .potential import rho_threshold
from .sampler import ChainState, GibbsParams, MoveWeights, MOVES, new_chain, run
from .stats import batch_means


@dataclass(frozen=True)
class Schedule:
    """Ordered ``(beta, sweeps)`` stages with strictly increasing ``beta``."""

    stages: tuple
    kind: str = "explicit"

    def __post_init__(self):
        stages = tuple((float(b), int(s)) for b, s in self.stages)
        if not stages:
            raise ValueError("schedule needs at least one stage")
        for (b0, _), (b1, _) in zip(stages, stages[1:]):
            if not b1 > b0:
                raise ValueError("schedule betas must be strictly increasing")
        if any(s < 1 for _, s in stages):
            raise ValueError("every stage needs sweeps >= 1")
        object.__setattr__(self, "stages", stages)

    @classmethod
    def geometric(cls, beta_min: float, beta_max: float, factor: float = 2.0,
                  sweeps: int = 1000) -> "Schedule":
        betas = []
        b = beta_min
        while b <= beta_max * (1 + 1e-12):
            betas.append(b)
            b *= factor
        return cls(tuple((b, sweeps) for b in betas), "geometric")

    @classmethod
    def linear(cls, beta_min: float, beta_max: float, count: int, sweeps: int = 1000) -> "Schedule":
        return cls(tuple((float(b), sweeps) for b in np.linspace(beta_min, beta_max, count)), "linear")

    @property
    def betas(self) -> tuple:
        return tuple(b for b, _ in self.stages)


@dataclass
class StageRecord:
    stage: int
    beta: float
    sweeps: int
    energies: list = field(default_factory=list)
    counts: list = field(default_factory=list)
    min_seps: list = field(default_factory=list)
    bad: list = field(default_factory=list)
    gap_fail: list = field(default_factory=list)
    gaps: list = field(default_factory=list)
    proposed: dict = field(default_factory=dict)
    accepted: dict = field(default_factory=dict)
    final: Snapshot | None = None
    chain_means_h: list = field(default_factory=list)
    chain_means_n: list = field(default_factory=list)

    @property
    def n_samples(self) -> int:
        return len(self.energies)

    def _mean_se(self, values, chain_means):
        if len(chain_means) >= 2:
            cm = np.asarray(chain_means)
            return float(np.mean(values)), float(cm.std(ddof=1) / math.sqrt(len(cm)))
        return batch_means(values) if values else (math.nan, math.nan)

    @property
    def mean_h(self) -> tuple:
        return self._mean_se(self.energies, self.chain_means_h)

    @property
    def mean_n(self) -> tuple:
        return self._mean_se(self.counts, self.chain_means_n)

    @property
    def bad_fraction(self) -> float:
        return sum(self.bad) / len(self.bad) if self.bad else 0.0

    @property
    def gap_fraction(self) -> float:
        return sum(self.gap_fail) / len(self.gap_fail) if self.gap_fail else math.nan

    @property
    def min_separation(self) -> float:
        return min(self.min_seps) if self.min_seps else math.inf

    def acceptance(self) -> dict:
        return {m: (self.accepted.get(m, 0) / self.proposed[m] if self.proposed.get(m) else 0.0)
                for m in MOVES}


@dataclass
class LadderState:
    records: list
    rho: float
    gap_threshold: float
    lam: float

    def rows(self) -> list:
        out = []
        for r in self.records:
            mh, seh = r.mean_h
            mn, sen = r.mean_n
            acc = r.acceptance()
            out.append({
                "stage": r.stage, "beta": r.beta, "mean_H": mh, "se_H": seh, "mean_N": mn,
                "se_N": sen, "bad_fraction": r.bad_fraction, "gap_fraction": r.gap_fraction,
                "min_separation": r.min_separation, "samples": r.n_samples,
                "acc_insert": acc["insert"], "acc_delete": acc["delete"], "acc_move": acc["move"],
            })
        return out


def default_gap_threshold(lam: float) -> float:
    return 0.1 * abs(lam) + 0.1


def _default_rho(cfg: Configuration, lam: float) -> float:
    p = cfg.potential
    if p.has_hard_core and p.diverges:
        return rho_threshold(p, lam, cfg.dimension)
    return p.hard_core_diameter


def anneal(init: ChainState, schedule: Schedule, lam: float, weights: MoveWeights,
           thin: int = 10, burn_fraction: float = 0.5, window: WindowTest | None = None,
           gap_samples: int = 20, rho: float | None = None,
           gap_threshold: float | None = None) -> LadderState:
    """Run every stage at its ``beta`` and fixed ``lam``, carrying the configuration forward.

    Per stage, after discarding ``burn_fraction`` of the sweeps, records energy,
    count, minimum separation and whether each sample lies in the close-pair
    event at ``rho`` (pair or boundary proximity).  With a ``window`` the
    excitation gap is computed on ``gap_samples`` evenly spaced samples and a
    sample counts as failing when its gap is below ``-gap_threshold``.
    """
    rho = _default_rho(init.config, lam) if rho is None else rho
    thr = default_gap_threshold(lam) if gap_threshold is None else gap_threshold
    records = []
    for k, (beta, sweeps) in enumerate(schedule.stages):
        g = GibbsParams(beta, lam)
        before_p, before_a = dict(init.proposed), dict(init.accepted)
        burn = int(sweeps * burn_fraction)
        if burn:
            run(init, g, weights, burn)
        snaps = []
        run(init, g, weights, sweeps - burn, min(thin, sweeps - burn), snaps.append)
        rec = StageRecord(k, beta, sweeps)
        for s in snaps:
            rec.energies.append(s.energy(lam))
            rec.counts.append(s.n)
            rec.min_seps.append(min_separation(s))
            rec.bad.append(is_bad(s, rho))
        if window is not None and snaps and gap_samples > 0:
            picks = np.unique(np.linspace(0, len(snaps) - 1, min(gap_samples, len(snaps))).astype(int))
            for i in picks.tolist():
                cfg = Configuration(snaps[i].box, init.config.potential, snaps[i].points, validate=False)
                gap = excitation_gap(cfg, window, lam).gap
                rec.gaps.append(gap)
                rec.gap_fail.append(gap < -thr)
        rec.proposed = {m: init.proposed[m] - before_p[m] for m in MOVES}
        rec.accepted = {m: init.accepted[m] - before_a[m] for m in MOVES}
        rec.final = init.config.snapshot(init.sweep)
        records.append(rec)
    return LadderState(records, rho, thr, lam)


def _chain_job(args):
    config, seed, chain, schedule, lam, weights, kw = args
    state = new_chain(config.copy(), seed, chain)
    return anneal(state, schedule, lam, weights, **kw)


def replica_ladder(chains: int, schedule: Schedule, config: Configuration, lam: float,
                   weights: MoveWeights, seed: int, workers: int = 1, **kw) -> LadderState:
    """Independent ladders from the same start, one Philox stream per chain, pooled per stage."""
    if chains < 1:
        raise ValueError("chains must be >= 1")
    jobs = [(config, seed, c, schedule, lam, weights, kw) for c in range(chains)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            ladders = list(pool.map(_chain_job, jobs))
    else:
        ladders = [_chain_job(j) for j in jobs]
    if chains == 1:
        return ladders[0]
    pooled = []
    for k, (beta, sweeps) in enumerate(schedule.stages):
        rec = StageRecord(k, beta, sweeps)
        for lad in ladders:
            r = lad.records[k]
            for name in ("energies", "counts", "min_seps", "bad", "gap_fail", "gaps"):
                getattr(rec, name).extend(getattr(r, name))
            for m in MOVES:
                rec.proposed[m] = rec.proposed.get(m, 0) + r.proposed[m]
                rec.accepted[m] = rec.accepted.get(m, 0) + r.accepted[m]
            rec.chain_means_h.append(float(np.mean(r.energies)) if r.energies else math.nan)
            rec.chain_means_n.append(float(np.mean(r.counts)) if r.counts else math.nan)
        rec.final = ladders[0].records[k].final
        pooled.append(rec)
    return LadderState(pooled, ladders[0].rho, ladders[0].gap_threshold, lam)
