"""Command line entry point: ``gibbs-anneal <subcommand> --config FILE --seed N --out DIR``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .annealing import anneal, replica_ladder
from .config import ConfigError, RunConfig, build_box, build_potential, build_schedule, emit, parse_config
from .configuration import Configuration, Snapshot
from .counterexample import default_experiment, nested_pump, pump_scan
from .ground_state import WindowTest, excitation_gap
from .observables import bad_event_fraction, delone_radii, density_field, min_separation
from .potential import bump, rho_threshold
from .sampler import GibbsParams, MoveWeights, new_chain, run

log = logging.getLogger("gibbs_anneal")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def fmt(v) -> str:
    """Number formatting for artifacts: repr floats, ``inf`` for infinities, never NaN."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            raise ValueError("refusing to emit NaN")
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


class Artifacts:
    def __init__(self, out: Path, cfg: RunConfig, seed: int):
        self.out = out
        self.meta = {"version": __version__, "seed": seed, "config_sha256": cfg.sha256}
        out.mkdir(parents=True, exist_ok=True)
        self.written = []

    def header(self) -> str:
        return f"# gibbs-anneal {self.meta['version']} seed={self.meta['seed']} config_sha256={self.meta['config_sha256']}\n"

    def csv(self, name: str, columns, rows) -> Path:
        path = self.out / name
        with open(path, "w", newline="") as fh:
            fh.write(self.header())
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow(["" if v is None else fmt(v) for v in row])
        self.written.append(path)
        return path

    def json(self, name: str, obj: dict) -> Path:
        path = self.out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {"meta": self.meta, **obj}
        path.write_text(json.dumps(_clean(payload), indent=1) + "\n")
        self.written.append(path)
        return path


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            raise ValueError("refusing to emit NaN")
        return fmt(v) if math.isinf(v) else v
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _weights(cfg: RunConfig) -> MoveWeights:
    m = cfg["moves"]
    return MoveWeights(m["insert"], m["delete"], m["move"], m["sigma"])


def _window(cfg: RunConfig, conf: Configuration, lam: float) -> WindowTest:
    wd = dict(cfg["window"])
    extra = {k: wd[k] for k in ("d_max", "i_max", "refine_top", "tol")}
    for k in ("r", "h"):
        if wd.get(k) is not None:
            extra[k] = wd[k]
    if "half_width" in wd:
        return WindowTest.centered(conf, wd["half_width"], lam, **extra)
    if "lower" not in wd or "upper" not in wd:
        raise ConfigError("window: give half_width or lower/upper")
    if "r" not in extra or "h" not in extra:
        p = conf.potential
        if not p.diverges:
            raise ConfigError("window: r and h are required for this potential family")
        gap = rho_threshold(p, lam, conf.dimension) - p.hard_core_diameter
        extra.setdefault("r", gap / 2)
        extra.setdefault("h", gap / 4)
    return WindowTest(tuple(wd["lower"]), tuple(wd["upper"]), **extra)


def _require(cfg: RunConfig, *sections):
    for s in sections:
        if s not in cfg.data:
            raise ConfigError(f"missing required section {s!r} for this subcommand")


def cmd_sample(cfg: RunConfig, seed: int, art: Artifacts) -> None:
    _require(cfg, "box")
    p = build_potential(cfg.data)
    conf = Configuration(build_box(cfg.data), p)
    g = GibbsParams(cfg["gibbs"]["beta"], cfg["gibbs"]["lambda"])
    sm = cfg["sampling"]
    state = new_chain(conf, seed)
    w = _weights(cfg)
    if sm["burn"]:
        run(state, g, w, sm["burn"])
    start, total, k = state.sweep, sm["sweeps"], sm["checkpoints"]
    checkpoints = {start + int(round(total * (j + 1) / k)) for j in range(k)}
    rows, snaps = [], []

    def sink(s: Snapshot):
        if (s.sweep - start) % sm["thin"] == 0:
            rows.append((s.sweep, s.n, s.energy(g.lam), min_separation(s)))
        if s.sweep in checkpoints:
            snaps.append(s)

    run(state, g, w, total, 1, sink)
    art.csv("samples.csv", ["sweep", "N", "H", "min_separation"], rows)
    for s in snaps:
        art.json(f"snapshots/snapshot_{s.sweep:08d}.json", s.to_json())
    art.json("final.json", state.config.snapshot(state.sweep).to_json())


def cmd_anneal(cfg: RunConfig, seed: int, art: Artifacts) -> None:
    _require(cfg, "box", "schedule")
    p = build_potential(cfg.data)
    conf = Configuration(build_box(cfg.data), p)
    lam = cfg["gibbs"]["lambda"]
    sched = build_schedule(cfg.data)
    a = cfg["anneal"]
    window = _window(cfg, conf, lam) if "window" in cfg.data else None
    kw = dict(thin=a["thin"], burn_fraction=a["burn_fraction"], window=window,
              gap_samples=a["gap_samples"], gap_threshold=a["gap_threshold"])
    ladder = replica_ladder(a["chains"], sched, conf, lam, _weights(cfg), seed, a["workers"], **kw)
    cols = ["stage", "beta", "mean_H", "se_H", "mean_N", "se_N", "bad_fraction", "gap_fraction",
            "min_separation", "samples", "acc_insert", "acc_delete", "acc_move"]
    rows = []
    for r in ladder.rows():
        rows.append([None if isinstance(r[c], float) and math.isnan(r[c]) else r[c] for c in cols])
    art.csv("ladder.csv", cols, rows)
    for rec in ladder.records:
        art.json(f"stages/stage_{rec.stage:02d}.json", rec.final.to_json())
    art.json("ladder.json", {"rho": ladder.rho, "gap_threshold": ladder.gap_threshold,
                             "lambda": lam, "stages": [list(s) for s in sched.stages]})


def cmd_check(cfg: RunConfig, seed: int, art: Artifacts) -> dict:
    _require(cfg, "check", "window")
    p = build_potential(cfg.data)
    with open(cfg["check"]["snapshot"]) as fh:
        snap = Snapshot.from_json(json.load(fh))
    try:
        conf = Configuration(snap.box, p, snap.points)
    except ValueError as e:
        raise ConfigError(f"snapshot: {e}") from None
    if math.isinf(conf.interaction):
        raise ConfigError("snapshot: configuration violates the hard core (infinite energy)")
    lam = cfg["gibbs"]["lambda"]
    try:
        test = _window(cfg, conf, lam)
        report = excitation_gap(conf, test, lam)
    except ValueError as e:
        raise ConfigError(f"window: {e}") from None
    payload = {"report": report.to_json(),
               "window": {"lower": list(test.lower), "upper": list(test.upper), "r": test.r,
                          "h": test.h, "d_max": test.d_max, "i_max": test.i_max,
                          "refine_top": test.refine_top}}
    art.json("report.json", payload)
    print(json.dumps(_clean(payload["report"]), indent=1))
    return payload


def cmd_observables(cfg: RunConfig, seed: int, art: Artifacts) -> None:
    _require(cfg, "observables")
    p = build_potential(cfg.data)
    ob = cfg["observables"]
    files = sorted(Path(ob["snapshots"]).glob("*.json"))
    if not files:
        raise ConfigError(f"observables: no snapshot JSON files in {ob['snapshots']}")
    snaps = []
    for f in files:
        obj = json.loads(f.read_text())
        if "points" in obj:
            snaps.append((f.name, Snapshot.from_json(obj)))
    dim = snaps[0][1].dimension
    trim = ob["trim"] if ob["trim"] is not None else 1.0
    field = density_field([s for _, s in snaps], ob["grid_pitch"], trim=trim)
    art.csv("density.csv", [f"x{i}" for i in range(dim)] + ["mean_count", "stderr"],
            [list(node) + [m, se] for node, m, se in zip(field.nodes.tolist(), field.mean, field.stderr)])
    rows = []
    for name, s in snaps:
        if s.n:
            d = delone_radii(s, ob["grid_pitch"], trim=p.range if ob["trim"] is None else ob["trim"])
            rows.append([name, s.n, d.packing, d.covering, d.grid_error])
        else:
            rows.append([name, 0, None, None, None])
    art.csv("delone.csv", ["snapshot", "N", "packing", "covering", "grid_error"], rows)
    rhos = ob["rho"]
    if rhos is None:
        lam = cfg["gibbs"]["lambda"]
        rhos = [rho_threshold(p, lam, dim)] if p.diverges else [max(p.hard_core_diameter, 1.0)]
    ss = [s for _, s in snaps]
    art.csv("badfrac.csv", ["rho", "fraction", "fraction_no_boundary", "samples"],
            [[r, bad_event_fraction(ss, r), bad_event_fraction(ss, r, include_boundary=False), len(ss)]
             for r in rhos])


def cmd_counterexample(cfg: RunConfig, seed: int, art: Artifacts) -> None:
    _require(cfg, "counterexample")
    ce = cfg["counterexample"]
    p = build_potential(cfg.data)
    if p.family != "bump":
        raise ConfigError("counterexample: potential.family must be 'bump'")
    pot_kw = {k: p.params[k] for k in ("h", "w", "r1", "r2", "R")}
    params = GibbsParams(ce["beta"], ce["lambda"])
    exp = default_experiment(potential=p, params=params, sweeps=ce["sweeps"])
    scan = pump_scan(exp, ce["grid"], seed)
    rows = [[p.params["w"], r.pins, seg, m, se] for r in scan for seg, m, se in zip(r.segments, r.means, r.stderr)]
    if ce["ablation"]:
        flat = default_experiment(potential=bump(**{**pot_kw, "w": 0.0}), params=params, sweeps=ce["sweeps"])
        rows += [[0.0, r.pins, seg, m, se] for r in pump_scan(flat, ce["grid"], seed)
                 for seg, m, se in zip(r.segments, r.means, r.stderr)]
    art.csv("pump.csv", ["well_depth", "N", "segment", "mean_count", "stderr"], rows)
    baseline = next(r for r in scan if r.pins == min(ce["grid"])).segment(0)[0]
    K = ce["K"] if ce["K"] is not None else 2.0 * baseline
    reports = nested_pump(exp, ce["levels"], K, ce["nested_grid"], seed)
    crow = []
    for rep in reports:
        if rep.result is None:
            crow.append([rep.level, None, rep.required, None, None, None, 0, 0, 0])
            continue
        for seg, m, se in zip(rep.result.segments, rep.result.means, rep.result.stderr):
            crow.append([rep.level, rep.pins, rep.required, seg, m, se, rep.above_K, rep.below_2K, rep.runaway])
    art.csv("cascade.csv", ["level", "pins", "required", "segment", "mean_count", "stderr",
                            "centre_above_K", "centre_below_2K", "runaway"], crow)
    art.json("counterexample.json", {"K": K, "baseline": baseline,
                                     "thresholds": [rep.pins for rep in reports]})


COMMANDS = {
    "sample": cmd_sample,
    "anneal": cmd_anneal,
    "check": cmd_check,
    "observables": cmd_observables,
    "counterexample": cmd_counterexample,
}


def run_command(subcommand: str, cfg: RunConfig, seed: int, out: Path) -> int:
    art = Artifacts(Path(out), cfg, seed)
    (art.out / "resolved-config.json").write_text(emit(cfg))
    try:
        COMMANDS[subcommand](cfg, seed, art)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001 - any module failure maps to the runtime exit code
        (art.out / "INCOMPLETE").write_text(f"{type(e).__name__}: {e}\n")
        print(f"runtime error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="gibbs-anneal", description=__doc__)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, type=Path)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = parse_config(args.config.read_text())
    except OSError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    seed = cfg["seed"] if args.seed is None else args.seed
    return run_command(args.command, cfg, seed, args.out)


if __name__ == "__main__":
    sys.exit(main())
