"""Interposer thickness sweep (50-500 um) with the marginal gain per micron."""

import argparse
from pathlib import Path

from stackthermal.export import write_metrics_csv
from stackthermal.stack import StackSpec
from stackthermal.sweep import DEFAULT_THICKNESSES_UM, GridOptions, SweepSpec, run_sweep


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--cell-um", type=float, default=250.0)
    p.add_argument("--material", default="hbn")
    p.add_argument("--thicknesses-um", type=float, nargs="+", default=list(DEFAULT_THICKNESSES_UM))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="out/thickness")
    args = p.parse_args()

    sweep = SweepSpec(base=StackSpec(interposer_material=args.material), family="interposer_thickness",
                      thicknesses=tuple(t * 1e-6 for t in args.thicknesses_um), parallelism=args.jobs,
                      grid=GridOptions(target_cell=args.cell_um * 1e-6))
    report = run_sweep(sweep)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_metrics_csv(report, out / "metrics.csv")
    rows = report.rows
    for i, r in enumerate(rows):
        gain = ""
        if i + 1 < len(rows):
            nxt = rows[i + 1]
            gain = f"{(r.t_max - nxt.t_max) / (nxt.thickness_um - r.thickness_um):.4f} K/um"
        print(f"{r.thickness_um:6.0f} um  t_max={r.t_max:10.3f} K  {gain}")


if __name__ == "__main__":
    main()
