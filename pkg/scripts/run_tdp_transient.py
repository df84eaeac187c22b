"""Si vs h-BN interposer at several TDPs: steady gap plus the 30 s warm-up trace.

The transient is expensive; use --cell-um 500 or more on a laptop.
"""

import argparse
from dataclasses import replace
from pathlib import Path

from stackthermal.analysis import gpu_metrics, leakage_reduction
from stackthermal.export import write_metrics_csv, write_traces_csv
from stackthermal.solve import TransientSchedule, solve_steady
from stackthermal.stack import StackSpec, voxelize
from stackthermal.sweep import GridOptions, SweepSpec, run_sweep


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--cell-um", type=float, default=500.0)
    p.add_argument("--tdps", type=float, nargs="+", default=[100.0, 200.0, 300.0])
    p.add_argument("--t-end", type=float, default=30.0)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="out/tdp")
    args = p.parse_args()

    cell = args.cell_um * 1e-6
    print("steady state")
    for tdp in args.tdps:
        t = {}
        for mat in ("silicon", "hbn"):
            spec = replace(StackSpec().with_tdp(tdp), interposer_material=mat)
            model = voxelize(spec, cell, 2)
            m = gpu_metrics(solve_steady(model), model)
            t[mat] = (m["t_max"], m["R"])
        gap = t["silicon"][0] - t["hbn"][0]
        dr = 1 - t["hbn"][1] / t["silicon"][1]
        print(f"  {tdp:5.0f} W  Si {t['silicon'][0]:9.3f} K  hBN {t['hbn'][0]:9.3f} K  gap {gap:6.3f} K  "
              f"R reduction {100 * dr:5.2f}%  leakage estimate {100 * leakage_reduction(gap):5.2f}%")

    sweep = SweepSpec(family="tdp_transient", tdps=tuple(args.tdps), parallelism=args.jobs,
                      grid=GridOptions(target_cell=cell),
                      schedule=TransientSchedule(dt=args.dt, t_end=args.t_end, sample_stride=100))
    report = run_sweep(sweep)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_metrics_csv(report, out / "metrics.csv")
    write_traces_csv(report, out / "traces.csv")
    print(f"transient to {args.t_end:g} s")
    for r in report.rows:
        print(f"  {r.label:>14s}  t_max(t_end)={r.t_max:9.3f} K")


if __name__ == "__main__":
    main()
