"""Reproduce the error-refinement tables of both models.

Runs the ``table1`` (nonlinear heat) and ``table4`` (viscous Burgers)
presets and writes reports under ``--out``.  Pass ``--scaling`` to also run
the weak-scaling presets ``table2`` and ``table5``; those hold every time
level's product matrix in memory and take several minutes.

    python scripts/reproduce_tables.py --out results
"""

import argparse
import sys

from paradin.cli import main as cli


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results")
    p.add_argument("--format", default="table", choices=("csv", "json", "table"))
    p.add_argument("--scaling", action="store_true", help="also run the weak-scaling presets")
    args = p.parse_args(argv)

    rc = 0
    for name in ("table1", "table4"):
        print(f"== {name}", flush=True)
        rc |= cli(["refine", "--config", name, "--out", f"{args.out}/{name}", "--format", args.format])
    if args.scaling:
        for name in ("table2", "table5"):
            print(f"== {name}", flush=True)
            rc |= cli(["scale", "--config", name, "--out", f"{args.out}/{name}", "--format", args.format])
    return rc


if __name__ == "__main__":
    sys.exit(main())
