"""Weak scaling: one time level per worker, measured next to the model speedup.

    python scripts/weak_scaling.py --model heat --nx 64 --nt 4,8,16

Wall-clock columns are measured on the host running the script; with fewer
cores than workers the threads share cores and no speedup is expected.
"""

import argparse
import sys

from paradin.analysis import predicted_speedup
from paradin.bench import DEFAULT_CF, experiment_from_mapping, report_table, run_experiment


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--model", default="heat", choices=("heat", "burgers"))
    p.add_argument("--nx", type=int, default=None, help="default 64 for heat, 63 for burgers")
    p.add_argument("--nt", default="4,8,16")
    p.add_argument("--cf", type=int, default=None)
    args = p.parse_args(argv)

    nx = args.nx or (64 if args.model == "heat" else 63)
    cf = args.cf or DEFAULT_CF[args.model]
    rc = 0
    for nt in (int(v) for v in args.nt.split(",")):
        cfg = experiment_from_mapping(
            {
                "name": "weak_scaling",
                "model": args.model,
                "grids": f"{nt}x{nx}",
                "solver": "both",
                "cf": cf,
                "executor": "pool",
                "workers": nt,
            }
        )
        report = run_experiment(cfg)
        sys.stdout.write(report_table(report))
        print(f"model speedup for Nt={nt}, c_f={cf}: {predicted_speedup(nt, cf):.2f}\n", flush=True)
        rc |= bool(report.failures)
    return int(rc)


if __name__ == "__main__":
    sys.exit(main())
