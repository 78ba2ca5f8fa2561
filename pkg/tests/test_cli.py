import json
import math
from pathlib import Path

import pytest

from gibbs_anneal.cli import main

ROOT = Path(__file__).resolve().parents[1]
WELL = {"family": "shoulder_well", "J": 1e-8, "alpha": 12, "a": 1.0, "R": 1.5}


def write(tmp_path, name, obj):
    f = tmp_path / name
    f.write_text(json.dumps(obj, indent=1))
    return f


def tree(d: Path) -> dict:
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def no_nan(d: Path):
    for p in d.rglob("*"):
        if p.is_file():
            assert "nan" not in p.read_text().lower()


@pytest.fixture
def sample_cfg(tmp_path):
    return write(tmp_path, "s.json", {
        "potential": WELL, "box": {"dimension": 2, "length": 5.0}, "gibbs": {"beta": 3.0},
        "sampling": {"sweeps": 60, "thin": 5, "checkpoints": 3}})


def test_sample_artifacts_and_determinism(tmp_path, sample_cfg):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["sample", "--config", str(sample_cfg), "--seed", "3", "--out", str(a)]) == 0
    assert main(["sample", "--config", str(sample_cfg), "--seed", "3", "--out", str(b)]) == 0
    assert tree(a) == tree(b)
    lines = (a / "samples.csv").read_text().splitlines()
    assert lines[0].startswith("# gibbs-anneal ") and "seed=3" in lines[0] and "config_sha256=" in lines[0]
    assert lines[1] == "sweep,N,H,min_separation"
    assert len(lines) == 2 + 12
    assert len(list((a / "snapshots").glob("*.json"))) == 3
    assert json.loads((a / "final.json").read_text())["meta"]["seed"] == 3
    assert (a / "resolved-config.json").exists()
    no_nan(a)
    c = tmp_path / "c"
    main(["sample", "--config", str(sample_cfg), "--seed", "4", "--out", str(c)])
    assert tree(a)["samples.csv"] != tree(c)["samples.csv"]


def test_anneal_one_row_per_stage(tmp_path):
    cfg = write(tmp_path, "a.json", {
        "potential": WELL, "box": {"dimension": 2, "length": 5.0},
        "schedule": {"kind": "geometric", "beta_min": 1, "beta_max": 8, "sweeps": 20},
        "anneal": {"gap_samples": 0, "chains": 2}})
    out = tmp_path / "o"
    assert main(["anneal", "--config", str(cfg), "--seed", "1", "--out", str(out)]) == 0
    rows = (out / "ladder.csv").read_text().splitlines()
    assert rows[1].startswith("stage,beta,mean_H,se_H,mean_N,se_N,bad_fraction,gap_fraction")
    assert len(rows) == 2 + 4
    # no window: gap fraction left empty rather than NaN
    assert all(r.split(",")[7] == "" for r in rows[2:])
    no_nan(out)


def test_check_report_and_hard_core_rejection(tmp_path, capsys):
    snap = {"dimension": 2, "bounds": [[0, 0], [5, 5]], "points": [[2.5, 2.5]], "boundary_points": []}
    ok = write(tmp_path, "ok.json", snap)
    cfg = write(tmp_path, "c.json", {"potential": WELL, "gibbs": {"lambda": 1.0},
                                     "window": {"half_width": 0.8}, "check": {"snapshot": str(ok)}})
    out = tmp_path / "o"
    assert main(["check", "--config", str(cfg), "--out", str(out)]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["verdict"] == "FAIL" and math.isclose(printed["gap"], -1.0, abs_tol=1e-9)
    assert json.loads((out / "report.json").read_text())["report"] == printed
    bad = write(tmp_path, "bad.json", {**snap, "points": [[2.5, 2.5], [3.0, 2.5]]})
    cfg2 = write(tmp_path, "c2.json", {"potential": WELL, "window": {"half_width": 0.8},
                                       "check": {"snapshot": str(bad)}})
    assert main(["check", "--config", str(cfg2), "--out", str(tmp_path / "o2")]) == 2


def test_observables_outputs(tmp_path, sample_cfg):
    a = tmp_path / "a"
    main(["sample", "--config", str(sample_cfg), "--out", str(a)])
    cfg = write(tmp_path, "ob.json", {"potential": WELL, "observables": {
        "snapshots": str(a / "snapshots"), "grid_pitch": 0.5, "rho": [1.1, 1.2]}})
    out = tmp_path / "o"
    assert main(["observables", "--config", str(cfg), "--out", str(out)]) == 0
    for name in ("density.csv", "delone.csv", "badfrac.csv"):
        assert (out / name).read_text().startswith("# gibbs-anneal")
    assert len((out / "badfrac.csv").read_text().splitlines()) == 4
    no_nan(out)


def test_counterexample_outputs(tmp_path):
    cfg = write(tmp_path, "ce.json", {
        "potential": {"family": "bump", "h": 2.0, "w": 0.05, "r1": 0.1, "r2": 2.2},
        "counterexample": {"grid": [0, 10], "nested_grid": [0, 10, 40], "levels": 2, "sweeps": 200}})
    out = tmp_path / "o"
    assert main(["counterexample", "--config", str(cfg), "--out", str(out)]) == 0
    pump = (out / "pump.csv").read_text().splitlines()
    assert pump[1] == "well_depth,N,segment,mean_count,stderr"
    assert len(pump) == 2 + 4
    assert (out / "cascade.csv").exists()
    no_nan(out)


def test_exit_codes(tmp_path):
    bad = write(tmp_path, "bad.json", {"potential": {"family": "hard_rods", "R": 0.9}})
    assert main(["sample", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert main(["sample", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "o")]) == 2
    nobox = write(tmp_path, "nobox.json", {"potential": {"family": "ideal"}})
    assert main(["sample", "--config", str(nobox), "--out", str(tmp_path / "o")]) == 2
    ce = write(tmp_path, "ce.json", {"potential": WELL, "counterexample": {}})
    assert main(["counterexample", "--config", str(ce), "--out", str(tmp_path / "o")]) == 2


def test_runtime_error_flags_partial_output(tmp_path, monkeypatch):
    import gibbs_anneal.cli as cli

    def boom(*a):
        raise RuntimeError("disk on fire")
    monkeypatch.setitem(cli.COMMANDS, "sample", boom)
    cfg = write(tmp_path, "s.json", {"potential": {"family": "ideal"}, "box": {"dimension": 1, "length": 2}})
    out = tmp_path / "o"
    assert main(["sample", "--config", str(cfg), "--out", str(out)]) == 3
    assert "disk on fire" in (out / "INCOMPLETE").read_text()


@pytest.mark.parametrize("name", sorted(p.name for p in (ROOT / "configs").glob("*.json")))
def test_shipped_configs_parse(name):
    from gibbs_anneal.config import parse_config
    parse_config((ROOT / "configs" / name).read_text())
