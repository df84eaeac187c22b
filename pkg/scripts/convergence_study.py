"""Grid convergence against the manufactured solution, plus the slab oracle."""

import argparse

from stackthermal.oracle import SlabProblem, convergence_order
from stackthermal.verify import mms_error, slab_error


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 40, 80])
    args = p.parse_args()

    errors = []
    for n in args.sizes:
        errors.append(mms_error(n))
        print(f"n={n:4d}  max error {errors[-1]:.4e} K")
        if len(errors) > 1:
            print(f"         ratio {errors[-2] / errors[-1]:.3f}")
    spacings = [1e-3 / n for n in args.sizes]
    print(f"observed order {convergence_order(errors, spacings):.4f}")

    for cells in (10, 20, 40, 80):
        err = slab_error(SlabProblem(1e-3, 140.0, 2e9, 250.0, 10.0, 298.15), cells)
        print(f"slab {cells:3d} cells  rel err {err:.3e}")


if __name__ == "__main__":
    main()
