"""Command-line entry point.

Exit codes: 0 success, 1 usage/config error, 2 solver failure, 3 partial sweep failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import export, verify
from .analysis import gpu_metrics
from .config import RunConfig, config_to_dict, parse_config
from .errors import ConfigError, SolverError, ThermalError
from .fvm import assemble_system
from .solve import run_transient, solve_steady
from .stack import voxelize
from .sweep import CaseResult, SweepReport, SweepSpec, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_PARTIAL = 0, 1, 2, 3

log = logging.getLogger("stackthermal")


def _load(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def _out_dir(args, cfg: RunConfig | None) -> Path:
    out = Path(args.out if args.out is not None else (cfg.output_dir if cfg else "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_solve(args) -> int:
    cfg = _load(args.config)
    out = _out_dir(args, cfg)
    lib = cfg.library()
    model = voxelize(cfg.stack, cfg.grid.target_cell, cfg.grid.cells_per_layer, library=lib,
                     max_dz=cfg.grid.max_dz)
    system = assemble_system(model)
    spec = cfg.stack
    row = CaseResult("solve", spec.hbm.dies_per_layer, spec.hbm.n_layers, spec.interposer_material,
                     spec.interposer_thickness * 1e6, spec.gpu_total_power)
    if args.transient:
        result = run_transient(model, cfg.schedule, cfg.solver, system=system)
        field = result.final
        row.iterations = result.iterations
        row.trace_times, row.trace_gpu_max = result.times, result.gpu_max
    else:
        field = solve_steady(system, cfg.solver)
        row.iterations = field.iterations
    m = gpu_metrics(field, model)
    row.t_max, row.hotspot_area, row.R, row.mean, row.std = (m["t_max"], m["hotspot_area"], m["R"],
                                                             m["mean"], m["std"])
    report = SweepReport("solve", [row])
    export.write_metrics_csv(report, out / "metrics.csv")
    export.write_traces_csv(report, out / "traces.csv")
    export.write_field_vtk(field, model, out / "field.vtk")
    gpu_k = m["location"][2]
    lo, hi = float(field.values.min()), float(field.values.max())
    if hi > lo:
        export.render_slice_pgm(field.values, "z", gpu_k, lo, hi, out / "gpu_slice.pgm")
    summary = {k: (list(v) if isinstance(v, tuple) else v) for k, v in m.items()}
    summary.update(cells=model.n_cells, iterations=row.iterations, total_power_w=model.total_power)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _jobs(args, sweep: SweepSpec) -> int:
    if args.jobs is not None:
        return args.jobs
    env = os.environ.get("THERMO_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"THERMO_JOBS must be an integer, got {env!r}") from None
    return sweep.parallelism


def cmd_sweep(args) -> int:
    cfg = _load(args.config)
    if cfg.sweep is None:
        raise ConfigError("config has no 'sweep' section", key="sweep")
    sweep = replace(cfg.sweep, parallelism=_jobs(args, cfg.sweep))
    out = _out_dir(args, cfg)
    report = run_sweep(sweep)
    export.write_metrics_csv(report, out / "metrics.csv")
    export.write_traces_csv(report, out / "traces.csv")
    for row in report.rows:
        status = "ok" if row.ok else f"FAILED {row.error}"
        print(f"{row.label:>16s}  t_max={row.t_max:.4f} K  R={row.R:.5g} K/W  {status}")
    return EXIT_PARTIAL if report.failed else EXIT_OK


def cmd_verify(args) -> int:
    checks = verify.run_all(include_mms=not args.quick)
    print(verify.format_table(checks))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_SOLVER


def cmd_render(args) -> int:
    values = export.read_field_vtk(args.field)
    plane = export.slice_field(values, args.axis, args.index)
    t_min = float(plane.min()) if args.min is None else args.min
    t_max = float(plane.max()) if args.max is None else args.max
    out = Path(args.output) if args.output else Path(args.field).with_suffix(f".{args.axis}{args.index}.pgm")
    export.render_slice_pgm(values, args.axis, args.index, t_min, t_max, out)
    print(out)
    return EXIT_OK


def builtin_families() -> dict:
    base = config_to_dict(RunConfig())
    base.pop("output")
    fams = {}
    for family, extra in (("hbm_distribution", {"total": 20}),
                          ("interposer_thickness", {"thicknesses_um": [50, 100, 150, 200, 250, 300, 400, 500]}),
                          ("tdp_transient", {"materials": ["silicon", "hbn"], "tdps_w": [100, 200, 300]})):
        cfg = json.loads(json.dumps(base))
        cfg["sweep"] = {"family": family, "parallelism": 1, **extra}
        fams[family] = cfg
    return fams


def cmd_families(args) -> int:
    fams = builtin_families()
    if args.family:
        print(json.dumps(fams[args.family], indent=2))
    else:
        print(json.dumps(fams, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stackthermal", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="steady (or --transient) solve of one configuration")
    s.add_argument("config")
    s.add_argument("--out", default=None, help="output directory (default: config output.dir)")
    s.add_argument("--transient", action="store_true")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("sweep", help="run a sweep family from a config with a 'sweep' section")
    s.add_argument("config")
    s.add_argument("--out", default=None)
    s.add_argument("--jobs", type=int, default=None, help="parallel cases (env THERMO_JOBS)")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("verify", help="run the analytic oracle checks")
    s.add_argument("--quick", action="store_true", help="skip the 80^3 manufactured-solution run")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("render", help="grayscale PGM slice of a VTK field dump")
    s.add_argument("field")
    s.add_argument("--axis", choices=("x", "y", "z"), default="z")
    s.add_argument("--index", type=int, required=True)
    s.add_argument("--min", type=float, default=None)
    s.add_argument("--max", type=float, default=None)
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("families", help="print the built-in sweep configs")
    s.add_argument("family", nargs="?", choices=("hbm_distribution", "interposer_thickness", "tdp_transient"))
    s.set_defaults(func=cmd_families)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, ThermalError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
