"""Newton update-norm histories of the marching and all-at-once solvers.

Runs the ``fig1`` (heat) and ``fig2`` (Burgers) presets and writes one CSV
per model with columns solver, grid, iteration, update_norm, residual_norm.

    python scripts/convergence_history.py --out results
"""

import argparse
import sys

from paradin.cli import main as cli


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results")
    args = p.parse_args(argv)
    rc = 0
    for name in ("fig1", "fig2"):
        print(f"== {name}", flush=True)
        rc |= cli(["history", "--config", name, "--out", f"{args.out}/{name}"])
    return rc


if __name__ == "__main__":
    sys.exit(main())
