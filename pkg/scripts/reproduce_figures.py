"""Run every CLI preset (or a chosen subset) into one output directory.

    python3 scripts/reproduce_figures.py --out results
    python3 scripts/reproduce_figures.py --out results fig1 fig5
"""
import argparse
import sys
import time

from pertdecomp.cli import PRESETS, main


def run_all(out: str, names: list[str]) -> int:
    for name in names:
        start = time.perf_counter()
        code = main(["run", "--preset", name, "--out", f"{out}/{name}"])
        print(f"{name}: exit {code} in {time.perf_counter() - start:.1f}s")
        if code:
            return code
    return 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results")
    parser.add_argument("presets", nargs="*", default=sorted(PRESETS))
    args = parser.parse_args()
    unknown = set(args.presets) - set(PRESETS)
    if unknown:
        parser.error(f"unknown presets: {sorted(unknown)}")
    sys.exit(run_all(args.out, args.presets))
