"""Command-line front end.

Subcommands: ``simulate`` (one closed-loop run), ``check`` (regulator
condition report), ``bound`` (settling-time bound), ``montecarlo``
(scenario campaign).  Exit codes are a stable scripting contract:
0 success / bounds met, 2 bounds violated, 1 usage or config error.

Every command writes a run manifest into the output directory, even on
partial failure; rerunning with the manifest's resolved configuration
reproduces the data outputs exactly.  The report paths also render PNG
figures next to the delimited output (disable with ``--no-plots``).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    build_campaign,
    build_regulators,
    build_sim,
    build_surface,
    load_config,
    parse_x0,
    resolve_config,
    resolved_to_ini,
)
from .errors import ConfigError, PretimeError
from .montecarlo import report_to_json, run_campaign, summarize
from .plant import get_plant
from .regulator import make_regulator
from .sim import integrate_closed_loop, settling_time
from .stability import check_conditions, classify, settling_bound

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATED = 2

ENV_OUT_DIR = "PRETIME_OUT_DIR"


def _json_dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _out_dir(args) -> Path:
    directory = args.out_dir or os.environ.get(ENV_OUT_DIR) or "pretime-out"
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    return path


class _Manifest:
    """Collects outputs and timing; always written, even on failure."""

    def __init__(self, command: str, out_dir: Path, argv: list[str]):
        self.data = {
            "artifact": {"name": "pretime", "version": __version__},
            "command": command,
            "argv": argv,
            "out_dir": str(out_dir),
            "outputs": [],
            "resolved_config": None,
            "seed": None,
            "status": "error",
            "error": None,
            "runtime_seconds": None,
        }
        self.out_dir = out_dir
        self._t0 = time.perf_counter()

    def add_output(self, path: Path) -> Path:
        self.data["outputs"].append(str(path))
        return path

    def write(self) -> None:
        self.data["runtime_seconds"] = time.perf_counter() - self._t0
        path = self.out_dir / "run_manifest.json"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(_json_dump(self.data))


def _write_text(manifest: _Manifest, name: str, text: str) -> Path:
    path = manifest.out_dir / name
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return manifest.add_output(path)


def _write_plot_data(manifest: _Manifest, name: str, t: np.ndarray, series: np.ndarray) -> Path:
    """Long-format plot data: scenario,t,value (one block per scenario)."""
    path = manifest.out_dir / name
    series = np.atleast_2d(series)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("scenario,t,value\n")
        for idx, row in enumerate(series):
            for ti, vi in zip(t, row):
                fh.write(f"{idx},{ti:.17g},{vi:.17g}\n")
    return manifest.add_output(path)


def _parse_kind_params(tokens: list[str]) -> tuple[str, float, dict]:
    if not tokens:
        raise ConfigError("expected a regulator kind name")
    kind = tokens[0]
    params: dict[str, float] = {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise ConfigError(f"regulator parameters must look like name=value, got {tok!r}")
        key, value = tok.split("=", 1)
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"regulator parameter {key.strip()!r}: not a number: {value!r}") from None
    try:
        p = params.pop("p")
    except KeyError:
        raise ConfigError("regulator arguments must include the exponent, e.g. p=0.5") from None
    return kind, p, params


# -- subcommands -------------------------------------------------------------


def cmd_simulate(args) -> int:
    out_dir = _out_dir(args)
    manifest = _Manifest("simulate", out_dir, list(args.raw_argv))
    status = EXIT_ERROR
    try:
        resolved = resolve_config(load_config(args.config, args.set), need_x0=True)
        manifest.data["resolved_config"] = resolved
        reg_slide, reg_reach = build_regulators(resolved)
        params = build_surface(resolved)
        sim_cfg = build_sim(resolved)
        plant = get_plant(resolved["plant"]["name"])
        x0 = parse_x0(resolved)

        traj = integrate_closed_loop(plant, params, reg_slide, reg_reach, x0, sim_cfg)
        thr_x1 = resolved["sim"]["settle_threshold_x1"]
        thr_s = resolved["sim"]["settle_threshold_s"]
        settle_x1 = settling_time(traj, thr_x1, "x1")
        settle_s = settling_time(traj, thr_s, "s")
        deadline = params.t1 + params.t2 + 1e-2
        settled = settle_x1 is not None and settle_x1 <= deadline

        traj.to_csv(manifest.out_dir / "trajectory.csv")
        manifest.add_output(manifest.out_dir / "trajectory.csv")
        diagnostics = {
            "x0": list(x0),
            "rows": len(traj),
            "settle_time_x1": settle_x1,
            "settle_time_s": settle_s,
            "settle_threshold_x1": thr_x1,
            "settle_threshold_s": thr_s,
            "deadline": deadline,
            "settled_within_deadline": settled,
            "reach_bound": settling_bound(reg_reach, 0.5 * float(traj.s[0]) ** 2, params.t2).bound,
            "terminated_early": traj.terminated_early,
            "termination_reason": traj.termination_reason,
        }
        _write_text(manifest, "diagnostics.json", _json_dump(diagnostics))
        _write_plot_data(manifest, "plot_x1.csv", traj.t, traj.x1)
        _write_plot_data(manifest, "plot_s.csv", traj.t, traj.s)
        _write_text(manifest, "resolved_config.ini", resolved_to_ini(resolved))
        if not args.no_plots:
            from .plots import save_trajectory_figure

            save_trajectory_figure(traj, manifest.out_dir / "trajectory.png", t_mark=params.t1 + params.t2)
            manifest.add_output(manifest.out_dir / "trajectory.png")

        print(_json_dump(diagnostics), end="")
        status = EXIT_OK if settled else EXIT_VIOLATED
        manifest.data["status"] = "ok" if status == EXIT_OK else "bound_violated"
        return status
    except PretimeError as exc:
        manifest.data["error"] = str(exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    finally:
        manifest.write()


def cmd_check(args) -> int:
    out_dir = _out_dir(args)
    manifest = _Manifest("check", out_dir, list(args.raw_argv))
    try:
        kind, p, params = _parse_kind_params([args.kind] + args.params)
        reg = make_regulator(kind, p, **params)
        grid = np.logspace(math.log10(args.grid_min), math.log10(args.grid_max), args.grid_points)
        report = check_conditions(reg, grid)
        payload = {"kind": kind, "p": p, "params": params, "report": report.to_dict()}
        manifest.data["resolved_config"] = payload
        print(_json_dump(payload), end="")
        ok = report.cond_i_ok and report.cond_ii_ok
        manifest.data["status"] = "ok" if ok else "conditions_violated"
        return EXIT_OK if ok else EXIT_VIOLATED
    except PretimeError as exc:
        manifest.data["error"] = str(exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    finally:
        manifest.write()


def cmd_bound(args) -> int:
    out_dir = _out_dir(args)
    manifest = _Manifest("bound", out_dir, list(args.raw_argv))
    try:
        kind, p, params = _parse_kind_params([args.kind] + args.params)
        reg = make_regulator(kind, p, **params)
        report = settling_bound(reg, args.v0, args.tc)
        payload = {"kind": kind, "p": p, "params": params, "v0": args.v0, **report.to_dict()}
        manifest.data["resolved_config"] = payload
        print(_json_dump(payload), end="")
        manifest.data["status"] = "ok"
        return EXIT_OK
    except PretimeError as exc:
        manifest.data["error"] = str(exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    finally:
        manifest.write()


def _print_summary_table(summary: dict) -> None:
    agg = summary["aggregates"]
    print(f"scenarios: {agg['n_scenarios']}  violations: {agg['violation_count']}  "
          f"decay-audit violations: {agg['cond3_violation_count']}  "
          f"early terminations: {agg['early_terminations']}")
    sx, ss = agg["settle_x1"], agg["settle_s"]

    def fmt(v):
        return "-" if v is None else f"{v:.4f}"

    print(f"settle x1 [s]: min {fmt(sx['min'])}  mean {fmt(sx['mean'])}  p90 {fmt(sx['p90'])}  max {fmt(sx['max'])}")
    print(f"settle s  [s]: min {fmt(ss['min'])}  mean {fmt(ss['mean'])}  p90 {fmt(ss['p90'])}  max {fmt(ss['max'])}")
    print(f"{'idx':>4} {'x1(0)':>12} {'x2(0)':>10} {'settle_x1':>10} {'settle_s':>10} {'reach_bnd':>10} flag")
    for row in summary["per_scenario"]:
        flag = "VIOLATED" if row["violated"] else ("ok" if row["within_reach_bound"] else "late-s")
        print(
            f"{row['index']:>4} {row['x0'][0]:>12.4f} {row['x0'][1]:>10.4f} "
            f"{fmt(row['settle_time_x1']):>10} {fmt(row['settle_time_s']):>10} "
            f"{row['reach_bound']:>10.4f} {flag}"
        )


def cmd_montecarlo(args) -> int:
    out_dir = _out_dir(args)
    manifest = _Manifest("montecarlo", out_dir, list(args.raw_argv))
    try:
        overrides = list(args.set)
        if args.seed is not None:
            overrides.append(f"campaign.seed={args.seed}")
        resolved = resolve_config(load_config(args.config, overrides), need_campaign=True)
        manifest.data["resolved_config"] = resolved
        manifest.data["seed"] = resolved["campaign"]["seed"]
        cfg = build_campaign(resolved)

        report = run_campaign(cfg, workers=args.parallel)
        _write_text(manifest, "report.json", report_to_json(report))
        summary = summarize(report)
        _print_summary_table(summary)

        traces = report.traces
        _write_plot_data(manifest, "plot_x1.csv", traces.t, traces.x1)
        _write_plot_data(manifest, "plot_s.csv", traces.t, traces.s)
        _write_text(manifest, "resolved_config.ini", resolved_to_ini(resolved))
        if resolved["campaign"]["dump_trajectories"]:
            for i in range(traces.n_scenarios):
                path = manifest.out_dir / f"scenario_{i}.csv"
                traces.scenario(i).to_csv(path)
                manifest.add_output(path)
        if not args.no_plots:
            from .plots import save_overlay_figure

            t_mark = cfg.surface.t1 + cfg.surface.t2
            save_overlay_figure(traces.t, traces.x1, manifest.out_dir / "fig_x1.png", "x1", t_mark=t_mark)
            manifest.add_output(manifest.out_dir / "fig_x1.png")
            save_overlay_figure(traces.t, traces.s, manifest.out_dir / "fig_s.png", "s", t_mark=t_mark)
            manifest.add_output(manifest.out_dir / "fig_s.png")

        violations = report.aggregates["violation_count"]
        manifest.data["status"] = "ok" if violations == 0 else "bound_violated"
        return EXIT_OK if violations == 0 else EXIT_VIOLATED
    except PretimeError as exc:
        manifest.data["error"] = str(exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    finally:
        manifest.write()


# -- argument parsing --------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out-dir", default=None, help=f"output directory (default ${ENV_OUT_DIR} or ./pretime-out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pretime", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pretime {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="one closed-loop run from a config")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
    p_sim.add_argument("--no-plots", action="store_true")
    _add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_check = sub.add_parser("check", help="classify a regulator and check its conditions")
    p_check.add_argument("kind")
    p_check.add_argument("params", nargs="*", metavar="NAME=VALUE")
    p_check.add_argument("--grid-min", type=float, default=1e-6)
    p_check.add_argument("--grid-max", type=float, default=1e6)
    p_check.add_argument("--grid-points", type=int, default=100)
    _add_common(p_check)
    p_check.set_defaults(func=cmd_check)

    p_bound = sub.add_parser("bound", help="settling-time bound from an initial Lyapunov value")
    p_bound.add_argument("kind")
    p_bound.add_argument("params", nargs="*", metavar="NAME=VALUE")
    p_bound.add_argument("--v0", type=float, required=True)
    p_bound.add_argument("--tc", type=float, required=True)
    _add_common(p_bound)
    p_bound.set_defaults(func=cmd_bound)

    p_mc = sub.add_parser("montecarlo", help="seeded scenario campaign from a config")
    p_mc.add_argument("--config", required=True)
    p_mc.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
    p_mc.add_argument("--seed", type=int, default=None, help="override campaign.seed")
    p_mc.add_argument("--parallel", type=int, default=1, metavar="N", help="worker processes")
    p_mc.add_argument("--no-plots", action="store_true")
    _add_common(p_mc)
    p_mc.set_defaults(func=cmd_montecarlo)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; keep 2 reserved for bound violations
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK
    args.raw_argv = argv
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
