import math

import numpy as np
import pytest

from gibbs_anneal.annealing import Schedule, anneal, default_gap_threshold, replica_ladder
from gibbs_anneal.configuration import BoxRegion, Configuration
from gibbs_anneal.ground_state import WindowTest
from gibbs_anneal.potential import ideal
from gibbs_anneal.sampler import GibbsParams, MoveWeights, new_chain, run


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule(((2.0, 10), (1.0, 10)))
    with pytest.raises(ValueError):
        Schedule(((1.0, 0),))
    with pytest.raises(ValueError):
        Schedule(())
    assert Schedule.geometric(1, 64, 2, 10).betas == (1, 2, 4, 8, 16, 32, 64)
    assert Schedule.linear(0, 1, 3, 5).betas == (0.0, 0.5, 1.0)


def test_single_stage_equals_plain_run(well):
    box = BoxRegion.cube(2, 5.0)
    w = MoveWeights.default(well, 0.0, 2)
    a = new_chain(Configuration(box, well), 5)
    lad = anneal(a, Schedule(((3.0, 40),)), 0.0, w, thin=4, burn_fraction=0.0)
    b = new_chain(Configuration(box, well), 5)
    snaps = []
    run(b, GibbsParams(3.0), w, 40, 4, snaps.append)
    assert a.config.points == b.config.points
    assert lad.records[0].energies == [s.energy(0.0) for s in snaps]
    assert len(lad.rows()) == 1


def test_chains_one_equals_anneal(well):
    box = BoxRegion.cube(2, 5.0)
    w = MoveWeights.default(well, 0.0, 2)
    sched = Schedule.geometric(1, 4, 2, 30)
    a = anneal(new_chain(Configuration(box, well), 2, 0), sched, 0.0, w)
    b = replica_ladder(1, sched, Configuration(box, well), 0.0, w, seed=2)
    assert a.rows() == b.rows()


def test_replica_ladder_is_deterministic_across_workers(well):
    box = BoxRegion.cube(2, 4.0)
    w = MoveWeights.default(well, 0.0, 2)
    sched = Schedule.geometric(1, 2, 2, 20)
    one = replica_ladder(3, sched, Configuration(box, well), 0.0, w, seed=4, workers=1)
    two = replica_ladder(3, sched, Configuration(box, well), 0.0, w, seed=4, workers=2)
    assert one.rows() == two.rows()


def test_pooled_variance_shrinks_with_chains():
    box = BoxRegion.cube(2, 2.0)
    w = MoveWeights(sigma=0.5)
    sched = Schedule(((0.0, 40),))

    def spread(chains):
        means = []
        for rep in range(30):
            lad = replica_ladder(chains, sched, Configuration(box, ideal()), 0.0, w,
                                 seed=1000 * chains + rep, thin=4, burn_fraction=0.25)
            means.append(lad.records[0].mean_n[0])
        return np.var(means, ddof=1)

    ratio = spread(2) / spread(8)
    assert 1.5 < ratio < 10.5


def test_small_ladder_cools(well):
    box = BoxRegion.cube(2, 5.0)
    w = MoveWeights.default(well, 0.0, 2)
    sched = Schedule.geometric(1, 64, 2, 150)
    cfg = Configuration(box, well)
    lad = replica_ladder(2, sched, cfg, 0.0, w, seed=3,
                         window=WindowTest.centered(cfg, 0.8, 0.0), gap_samples=4)
    rows = lad.rows()
    assert len(rows) == 7
    for a, b in zip(rows, rows[1:]):
        assert b["mean_H"] <= a["mean_H"] + 2 * math.hypot(a["se_H"], b["se_H"])
    assert rows[-1]["bad_fraction"] < 0.01
    assert all(0.0 <= r["gap_fraction"] <= 1.0 for r in rows)
    assert lad.gap_threshold == default_gap_threshold(0.0) == 0.1
