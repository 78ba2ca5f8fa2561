import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gibbs_anneal.configuration import BoxRegion, Configuration, Snapshot
from gibbs_anneal.observables import (bad_event_fraction, delone_radii, density_cap,
                                      density_field, is_bad, min_separation, unit_ball_volume)
from gibbs_anneal.potential import hard_rods, ideal, shoulder_well
from gibbs_anneal.sampler import GibbsParams, MoveWeights, new_chain, run

from conftest import SHIPPED


def snap(points, lower, upper, boundary=()):
    return Snapshot(len(lower), tuple(lower), tuple(upper), tuple(map(tuple, points)),
                    tuple(map(tuple, boundary)))


def test_min_separation_examples():
    assert min_separation(snap([(1, 1), (2.3, 1)], (0, 0), (4, 4))) == pytest.approx(1.3)
    assert min_separation(snap([(1, 1)], (0, 0), (4, 4))) == math.inf
    assert min_separation(snap([], (0, 0), (4, 4))) == math.inf


def test_min_separation_matches_brute_force():
    rng = np.random.default_rng(0)
    for k in range(1000):
        dim = 1 + k % 3
        n = int(rng.integers(2, 60))
        # mix clustered and spread-out layouts so both code paths run
        scale = 10.0 if k % 2 else 0.5
        pts = rng.uniform(0, scale, (n, dim))
        s = snap(pts.tolist(), (0,) * dim, (scale,) * dim)
        rows = pts.tolist()
        brute = min(math.dist(a, b) for i, a in enumerate(rows) for b in rows[i + 1:])
        assert min_separation(s) == brute


def test_delone_rods():
    pts = [(x,) for x in np.arange(0.0, 6.01, 1.5)]
    d = delone_radii(snap(pts, (0,), (6,)), 0.01)
    assert d.packing == pytest.approx(1.5)
    assert abs(d.covering - 0.75) <= d.grid_error + 1e-12


def test_delone_triangular_lattice():
    a = 1.3
    ks = np.array([(i, j) for i in range(-5, 20) for j in range(-5, 20)], float)
    lat = ks @ (np.array([[1.0, 0.0], [0.5, math.sqrt(3) / 2]]) * a)
    keep = lat[(lat >= -2).all(1) & (lat <= 12).all(1)]
    inside = [tuple(x) for x in keep if ((x >= 0) & (x <= 10)).all()]
    outside = [tuple(x) for x in keep if not ((x >= 0) & (x <= 10)).all()]
    d = delone_radii(snap(inside, (0, 0), (10, 10), outside), 0.02)
    assert d.packing == pytest.approx(a)
    assert abs(d.covering - a / math.sqrt(3)) <= d.grid_error


def test_delone_single_particle():
    d = delone_radii(snap([(1.0, 1.0)], (0, 0), (4, 3)), 0.5)
    assert d.packing == math.inf
    assert d.covering == pytest.approx(math.hypot(3, 2))


def test_empty_samples():
    f = density_field([], 0.5, box=snap([], (0, 0), (4, 4)))
    assert np.all(f.mean == 0)
    assert bad_event_fraction([], 1.2) == 0.0


def test_boundary_proximity_is_bad():
    rho = 1.2
    s = snap([(0.5, 2.0), (3.0, 2.0)], (0, 0), (4, 4), [(-rho / 2 + 0.5, 2.0)])
    assert min_separation(s) > rho
    assert is_bad(s, rho)
    assert not is_bad(s, rho, include_boundary=False)


@given(st.integers(0, 2**31), st.floats(1.0, 2.0), st.floats(0.0, 0.5))
def test_bad_fraction_monotone_and_boundary_inclusion(seed, rho, extra):
    rng = np.random.default_rng(seed)
    samples = [snap(rng.uniform(0, 5, (rng.integers(0, 12), 2)).tolist(), (0, 0), (5, 5),
                    [(-0.5, y) for y in np.arange(0.5, 5, 1.1)]) for _ in range(20)]
    assert bad_event_fraction(samples, rho) <= bad_event_fraction(samples, rho + extra)
    assert bad_event_fraction(samples, rho, include_boundary=False) <= bad_event_fraction(samples, rho)


def test_ideal_gas_density_is_flat():
    box = BoxRegion.cube(2, 4.0)
    s = new_chain(Configuration(box, ideal()), seed=17)
    samples = []
    run(s, GibbsParams(0.0), MoveWeights(sigma=0.5), 6000, 3, samples.append)
    f = density_field(samples[100:], 1.0)
    target = unit_ball_volume(2)
    z = (f.mean - target) / f.stderr
    assert np.all(np.abs(z) < 4)


def test_hard_core_density_cap():
    p = shoulder_well(**SHIPPED)
    s = new_chain(Configuration(BoxRegion.cube(2, 5.0), p), seed=3)
    samples = []
    run(s, GibbsParams(20.0), MoveWeights.default(p, 0, 2), 300, 10, samples.append)
    f = density_field(samples, 0.5, trim=0.0)
    assert f.mean.max() <= density_cap(p, 2)
    assert f.mean.min() >= 0
