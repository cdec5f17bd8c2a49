"""Improvement metrics of the perturbative formula against both baselines over a g sweep."""
import argparse

import numpy as np

from pertdecomp.analysis import parameter_sweep
from pertdecomp.model import ChainSpec
from pertdecomp.schemes import SchemeId


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-sites", type=int, default=6)
    parser.add_argument("--h", type=float, default=0.3)
    parser.add_argument("--g", type=float, nargs="+", default=[0.1, 0.2, 0.5, 1.0, 2.0])
    parser.add_argument("--t-max", type=float, default=1.5)
    parser.add_argument("--spacing", type=float, default=0.01)
    args = parser.parse_args()

    steps = int(round(args.t_max / args.spacing))
    grid = np.round(np.arange(1, steps + 1) * args.spacing, 12)
    base = ChainSpec.uniform(args.n_sites, 1.0, args.g[0], args.h)
    print(f"{'reference':<12} {'g':>6} {'max_gain':>11} {'t_base':>8} {'err_red':>8}")
    for ref in (SchemeId.NESTED_UNIT, SchemeId.TROTTER2):
        for p in parameter_sweep(base, "g", args.g, grid, reference=ref).points:
            if not p.ok:
                print(f"{ref.value:<12} {p.axis_value:>6} failed: {p.error}")
                continue
            print(f"{ref.value:<12} {p.axis_value:>6} {p.max_improvement:>11.3e} "
                  f"{p.baseline_time:>8.4f} {p.error_reduction:>8.3f}")


if __name__ == "__main__":
    main()
