"""Command-line entry point.

Exit codes: 0 success, 2 configuration or input error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .metrics import compare, summarize
from .safety import sample_grid
from .simulation import (
    PLANNERS,
    ConfigError,
    SimLog,
    _jsonable,
    build_tracks,
    load_json,
    load_scenario,
    load_variants,
    plan_initial,
    resolve_scenario,
    run_ablation,
    run_scenario,
)
from .svgplot import bar_panels, line_plot
from .traffic import ReplayFormatError, read_replay_csv, replay_track

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
FORMATS = ("csv", "json", "svg")


class _InputError(Exception):
    pass


def _formats(text: str) -> List[str]:
    out = [f.strip() for f in text.split(",") if f.strip()]
    bad = [f for f in out if f not in FORMATS]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"formats must be a comma list drawn from {FORMATS}")
    return out


def _load(args, ref):
    overrides = {"dt": args.dt} if getattr(args, "dt", None) is not None else None
    try:
        return load_scenario(ref, overrides)
    except FileNotFoundError as exc:
        raise _InputError(str(exc)) from exc
    except (ConfigError, ValueError) as exc:
        raise _InputError(f"{ref}: {exc}") from exc


def _outdir(path: str) -> Path:
    p = Path(path)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _InputError(f"cannot create output directory {p}: {exc}") from exc
    return p


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    path.write_text(buf.getvalue())


def _cell(v):
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, np.floating):
        return _cell(float(v))
    return v


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), sort_keys=True, indent=1, allow_nan=False) + "\n")


def _trajectory_svg(config, logs: Sequence[SimLog], title: str) -> str:
    series = [(log.planner, log.columns["x"], log.columns["y"]) for log in logs]
    tracks = build_tracks(config)
    t = logs[0].columns["t"]
    for tr in tracks:
        ox, oy, _, _ = tr.at(t)
        series.append((tr.id, ox, oy))
    hlines = [(b, "solid") for b in config.lanes.all_boundaries()]
    return line_plot(series, title, "x [m]", "y [m]", hlines)


# ---------------------------------------------------------------------------
# subcommands


def cmd_plan(args) -> int:
    cfg = _load(args, args.scenario)
    out = _outdir(args.out)
    tracks = build_tracks(cfg)
    plan, report = plan_initial(cfg, args.planner, tracks)
    times, _ = sample_grid(0.0, cfg.horizon, cfg.dt)
    s = plan.sample(times)
    stem = f"{cfg.name}.{args.planner}.plan"
    if "csv" in args.format:
        keys = ["t", "x", "y", "vy", "ay", "jy"]
        _write_csv(out / f"{stem}.csv", keys, zip(*(s[k].tolist() for k in keys)))
    info = {"name": cfg.name, "planner": args.planner, "kind": plan.kind,
            "maneuver_start": plan.maneuver_start, "maneuver_end": plan.maneuver_end}
    if report is not None:
        info["optimizer"] = {
            "iterations": report.iterations,
            "converged": report.converged,
            "reason": report.reason,
            "cost_history": report.cost_history,
            "final_params": report.final_params.tolist(),
            "breakdown": report.breakdown._asdict(),
        }
    if "json" in args.format:
        _dump_json(out / f"{stem}.json", info)
    if "svg" in args.format:
        (out / f"{stem}.svg").write_text(
            line_plot([(args.planner, s["x"], s["y"])], f"{cfg.name} plan", "x [m]", "y [m]",
                      [(b, "solid") for b in cfg.lanes.all_boundaries()])
        )
        if "csv" not in args.format:
            _write_csv(out / f"{stem}.csv", ["t", "x", "y"], zip(times.tolist(), s["x"].tolist(), s["y"].tolist()))
    print(f"{cfg.name}: {args.planner} plan, maneuver [{plan.maneuver_start:.3f}, {plan.maneuver_end:.3f}] s")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load(args, args.scenario)
    out = _outdir(args.out)
    log = run_scenario(cfg, args.planner)
    summary = summarize(log, cfg.safety)
    stem = f"{cfg.name}.{args.planner}"
    log.to_csv(out / f"{stem}.log.csv")
    _dump_json(out / f"{stem}.summary.json", {"summary": summary.to_dict(), "replans": log.replans, "meta": log.meta})
    (out / f"{stem}.trajectory.svg").write_text(_trajectory_svg(cfg, [log], f"{cfg.name} ({args.planner})"))
    if "json" in args.format:
        log.to_json(out / f"{stem}.log.json")
    print(
        f"{cfg.name} [{args.planner}] steps={log.n_steps} replans={len(log.replans)} "
        f"min_gap={summary.min_gap:.3f} m min_ttc={summary.min_ttc:.3f} s"
    )
    return EXIT_OK


def cmd_compare(args) -> int:
    planners = []
    for p in args.planner or []:
        planners.extend(x.strip() for x in p.split(",") if x.strip())
    if len(planners) < 2:
        raise _InputError("compare needs at least two planners (repeat --planner or pass a comma list)")
    unknown = [p for p in planners if p not in PLANNERS]
    if unknown:
        raise _InputError(f"unknown planner(s) {unknown}; choose from {PLANNERS}")
    cfg = _load(args, args.scenario)
    out = _outdir(args.out)
    logs = [run_scenario(cfg, p) for p in planners]
    table = compare([(p, summarize(l, cfg.safety)) for p, l in zip(planners, logs)])
    (out / f"{cfg.name}.comparison.csv").write_text(table.to_csv())
    (out / f"{cfg.name}.comparison.txt").write_text(table.to_text())
    for oid in logs[0].obstacle_ids:
        series = [(l.planner, l.columns["x"], l.columns[f"gap_{oid}"]) for l in logs]
        (out / f"{cfg.name}.gap_{oid}.svg").write_text(line_plot(series, f"gap to {oid}", "ego x [m]", "gap [m]"))
        header, rows = ["planner", "t", "x", "gap"], []
        for l in logs:
            rows.extend((l.planner, t, x, g) for t, x, g in zip(l.columns["t"].tolist(), l.columns["x"].tolist(),
                                                                   l.columns[f"gap_{oid}"].tolist()))
        _write_csv(out / f"{cfg.name}.gap_{oid}.csv", header, rows)
    (out / f"{cfg.name}.trajectories.svg").write_text(_trajectory_svg(cfg, logs, f"{cfg.name} trajectories"))
    rows = []
    for l in logs:
        rows.extend((l.planner, t, x, y) for t, x, y in zip(l.columns["t"].tolist(), l.columns["x"].tolist(), l.columns["y"].tolist()))
    _write_csv(out / f"{cfg.name}.trajectories.csv", ["planner", "t", "x", "y"], rows)
    print(table.to_text(), end="")
    return EXIT_OK


ABLATION_PANELS = (
    ("Longitudinal distance [m]", "longitudinal_distance"),
    ("Average curvature [1/m]", "avg_curvature"),
    ("Minimum gap [m]", "min_gap"),
    ("Total time [s]", "total_time"),
)


def cmd_ablate(args) -> int:
    try:
        variants = load_variants(args.variants)
    except FileNotFoundError as exc:
        raise _InputError(str(exc)) from exc
    except ConfigError as exc:
        raise _InputError(f"{args.variants}: {exc}") from exc
    try:
        path = resolve_scenario(args.scenario)
    except FileNotFoundError as exc:
        raise _InputError(str(exc)) from exc
    raw = load_json(path)
    if args.dt is not None:
        raw = dict(raw, dt=args.dt)
    out = _outdir(args.out)
    try:
        results = run_ablation(raw, variants, args.planner, base_dir=str(path.parent))
    except ConfigError as exc:
        raise _InputError(f"{args.variants}: {exc}") from exc
    base_name = raw.get("name", path.stem)
    names = [n for n, _, _ in results]
    rows = [s.as_row() for _, _, s in results]
    metrics = list(rows[0])
    _write_csv(out / f"{base_name}.ablation.csv", ["variant"] + metrics, [[n] + [r[m] for m in metrics] for n, r in zip(names, rows)])
    for n, _, s in results:
        safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in n)
        _dump_json(out / f"{base_name}.{safe}.summary.json", {"variant": n, "summary": s.to_dict()})
    panels = [(title, names, [r[key] for r in rows]) for title, key in ABLATION_PANELS]
    (out / f"{base_name}.ablation.svg").write_text(bar_panels(panels))
    print(compare([(n, s) for n, _, s in results]).to_text(), end="")
    return EXIT_OK


def cmd_replay_check(args) -> int:
    try:
        samples = read_replay_csv(args.csv)
    except FileNotFoundError as exc:
        raise _InputError(f"replay file not found: {args.csv}") from exc
    except ReplayFormatError as exc:
        where = f" (line {exc.line})" if exc.line is not None else ""
        raise _InputError(f"{args.csv}{where}: {exc}") from exc
    t = samples[:, 0]
    dt = args.dt if args.dt is not None else float(np.median(np.diff(t)))
    horizon = float(t[-1] - t[0]) if t[-1] > t[0] else dt
    track = replay_track(samples, (1.0, 0.0, (0.0, 0.0)), args.smoothing, horizon, dt, "replay")
    speed = np.hypot(track.vx, track.vy)
    report = {
        "rows": int(samples.shape[0]),
        "t_range": [float(t[0]), float(t[-1])],
        "median_step": float(np.median(np.diff(t))),
        "resampled_steps": int(track.t.size),
        "speed_min": float(speed.min()),
        "speed_max": float(speed.max()),
    }
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ttcplanner", description="TTC-aware lane-change and overtaking planner")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, planner_multi=False):
        if planner_multi:
            sp.add_argument("--planner", action="append", help=f"planner name, repeatable or comma list; one of {PLANNERS}")
        else:
            sp.add_argument("--planner", default="proposed", choices=PLANNERS)
        sp.add_argument("--out", default=".", help="output directory (created if missing)")
        sp.add_argument("--format", type=_formats, default=["csv", "svg"], help="comma list of csv,json,svg")
        sp.add_argument("--dt", type=float, default=None, help="override the scenario time step [s]")
        sp.add_argument("--seedless", action="store_true", default=True,
                        help="deterministic mode (the only mode; reserved flag)")

    sp = sub.add_parser("plan", help="plan without rolling out")
    sp.add_argument("scenario")
    common(sp)
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("simulate", help="roll out one planner on a scenario")
    sp.add_argument("scenario")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("compare", help="roll out several planners and tabulate metrics")
    sp.add_argument("scenario")
    common(sp, planner_multi=True)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("ablate", help="run parameter variants of one scenario")
    sp.add_argument("scenario")
    sp.add_argument("variants")
    common(sp)
    sp.set_defaults(func=cmd_ablate)

    sp = sub.add_parser("replay-check", help="validate and summarize a t,x,y replay CSV")
    sp.add_argument("csv")
    sp.add_argument("--smoothing", type=int, default=1, help="moving-average window in samples")
    sp.add_argument("--dt", type=float, default=None)
    sp.set_defaults(func=cmd_replay_check)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if getattr(args, "dt", None) is not None and not args.dt > 0:
        print("error: --dt must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - last-resort reporting for the exit-code contract
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
