import json

import pytest
from hypothesis import given, strategies as st

from gibbs_anneal.config import ConfigError, emit, parse_config

MINIMAL = '{"potential": {"family": "shoulder_well"}, "box": {"dimension": 2, "length": 4}}'


def test_minimal_config_gets_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg["seed"] == 0
    assert cfg["boundary"] == {"kind": "empty"}
    assert cfg["gibbs"] == {"beta": 1.0, "lambda": 0.0}
    assert cfg["box"]["upper"] == [4.0, 4.0]
    assert cfg["moves"]["sigma"] > 0
    assert cfg["potential"]["R"] == 2.0 and cfg["potential"]["m"] == 0.5


def test_short_range_rejected_with_reason():
    with pytest.raises(ConfigError, match="R > 1"):
        parse_config('{"potential": {"family": "hard_rods", "R": 0.9}}')


def test_unknown_key_reported_with_line():
    text = '{\n "potential": {"family": "ideal"},\n "gibbs": {"beta": 1, "temp": 3}\n}'
    with pytest.raises(ConfigError, match=r"line 3.*temp"):
        parse_config(text)


def test_bad_json_reported_with_line():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config('{"potential":\n {"family": }')


def test_infeasible_boundary_rejected(tmp_path):
    snap = {"dimension": 1, "bounds": [[0], [3]], "points": [], "boundary_points": [[-0.2], [-0.8]]}
    f = tmp_path / "b.json"
    f.write_text(json.dumps(snap))
    text = json.dumps({"potential": {"family": "hard_rods"}, "box": {"dimension": 1, "length": 3},
                       "boundary": {"kind": "file", "path": str(f)}})
    with pytest.raises(ConfigError, match="hard core"):
        parse_config(text)


def test_weights_must_sum_to_one():
    with pytest.raises(ConfigError, match="sum to 1"):
        parse_config('{"potential": {"family": "ideal"}, "moves": {"insert": 0.5}}')


def test_schedule_checked():
    with pytest.raises(ConfigError, match="schedule"):
        parse_config('{"potential": {"family": "ideal"}, '
                     '"schedule": {"kind": "explicit", "stages": [[2, 10], [1, 10]]}}')


@given(st.sampled_from(["shoulder_well", "hard_rods", "bump", "ideal"]),
       st.integers(1, 3), st.floats(2.5, 9.0), st.floats(0.0, 10.0), st.floats(-2, 2),
       st.integers(0, 10**6), st.booleans())
def test_round_trip(family, dim, length, beta, lam, seed, with_schedule):
    raw = {"seed": seed, "potential": {"family": family},
           "box": {"dimension": dim, "length": length}, "gibbs": {"beta": beta, "lambda": lam}}
    if with_schedule:
        raw["schedule"] = {"kind": "geometric", "beta_min": 1, "beta_max": 8, "sweeps": 5}
        raw["window"] = {"half_width": 0.4}
    if family == "shoulder_well" and dim > 1:
        raw["boundary"] = {"kind": "lattice", "lattice": "square", "spacing": 1.25}
    once = parse_config(json.dumps(raw))
    twice = parse_config(emit(once))
    assert once == twice
    assert emit(once) == emit(twice)
    assert once.sha256 == twice.sha256
