from dataclasses import replace

import numpy as np
import pytest

from gibbs_anneal.counterexample import (PumpExperiment, default_experiment, find_pump_threshold,
                                         nested_pump, pump_expectation, pump_scan, segment_counts,
                                         trend)
from gibbs_anneal.potential import bump, shoulder_well
from gibbs_anneal.sampler import GibbsParams


@pytest.fixture(scope="module")
def exp():
    return default_experiment(sweeps=1500)


@pytest.fixture(scope="module")
def cache():
    return {}


def test_refuses_hard_core_family():
    with pytest.raises(ValueError, match="bump"):
        PumpExperiment(shoulder_well(), GibbsParams(1.0))


def test_pins_sit_in_outer_segments():
    e = default_experiment(pins=7, half_levels=1)
    pins = np.array(e.pin_positions())[:, 0]
    assert len(pins) == 14
    assert np.all((np.abs(pins) >= 1.5) & (np.abs(pins) <= 2.5))
    assert np.allclose(sorted(pins), sorted(-pins))
    e.box().validate(e.potential)


def test_segment_counts():
    assert segment_counts([(-0.6,), (0.1,), (0.4,), (1.2,)], 1).tolist() == [1, 2, 1]


def test_ideal_gas_baseline():
    e = PumpExperiment(bump(h=2.0, w=0.0, r1=0.1), GibbsParams(0.0, 0.0), sweeps=6000)
    r = pump_expectation(e, seed=1)
    m, se = r.segment(0)
    assert abs(m - 1.0) < 3 * se


def test_pumping_grows_with_pins(exp, cache):
    res = [pump_expectation(exp.with_pins(n), seed=0) for n in (0, 10, 20, 40)]
    means = [r.segment(0)[0] for r in res]
    assert all(b > a for a, b in zip(means, means[1:]))
    slope, se = trend(res)
    assert slope > 3 * se


def test_ablation_is_flat():
    flat = default_experiment(potential=bump(h=2.0, w=0.0, r1=0.1), sweeps=1500)
    slope, se = trend(pump_scan(flat, (0, 10, 20, 40), seed=0))
    assert abs(slope) < 3 * se


def test_threshold_edges(exp, cache):
    base = pump_expectation(exp, 0).segment(0)[0]
    assert find_pump_threshold(exp, base / 4, (0, 10, 20), 0, cache=cache).pins == 0
    grid = (0, 10, 20, 40)
    k1 = find_pump_threshold(exp, 2 * base, grid, 0, cache=cache)
    k2 = find_pump_threshold(exp, 4 * base, grid, 0, cache=cache)
    assert k1.pins is not None
    assert k2.exhausted or k2.pins >= k1.pins
    assert find_pump_threshold(exp, 1e6, grid, 0, cache=cache).exhausted
    with pytest.raises(ValueError):
        find_pump_threshold(exp, 0.0, grid)


def test_one_level_is_threshold(exp, cache):
    K = 0.6
    rep = nested_pump(exp, 1, K, (0, 10, 20), 0, cache)
    assert len(rep) == 1
    assert rep[0].pins == find_pump_threshold(exp, K, (0, 10, 20), 0, cache=cache).pins


def test_mirror_symmetry(exp):
    r = pump_expectation(replace(exp, pins=40, half_levels=1), 0)
    (ml, sl), (mr, sr) = r.segment(-1), r.segment(1)
    assert abs(ml - mr) < 3 * np.hypot(sl, sr)


def test_reproducible(exp):
    assert pump_expectation(exp.with_pins(10), 3) == pump_expectation(exp.with_pins(10), 3)
