"""Conditioning of the level products against the analytic N_t limit.

Prints the largest N_t allowed by the conditioning estimate for the
``condition_sweep`` preset, then, for a small linear heat problem, the
2-norm condition number of the product of N_t identical Jacobians so the
growth can be compared with the estimate.

    python scripts/condition_sweep.py --nx 32 --mu 1e-2 --max-nt 256
"""

import argparse
import sys

import numpy as np

from paradin.analysis import condition_bound_max_Nt
from paradin.cli import main as cli
from paradin.discretization import SpaceTimeGrid, assemble_jacobian
from paradin.models import custom_model


def product_conditions(nx: int, mu: float, max_nt: int):
    """cond(A^n) for n = 1, 2, 4, ... with A the constant-viscosity heat Jacobian."""
    model = custom_model(viscosity=lambda u: np.full_like(np.asarray(u, dtype=float), mu))
    grid = SpaceTimeGrid.for_model(model, max_nt, nx)
    A = assemble_jacobian(grid, model, np.zeros(grid.ns), grid.time(1)).to_dense()
    rows, P, n = [], A.copy(), 1
    while n <= max_nt:
        rows.append((n, np.linalg.cond(P)))
        P, n = P @ P, 2 * n
    return rows


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nx", type=int, default=32)
    p.add_argument("--mu", type=float, default=1e-2)
    p.add_argument("--max-nt", type=int, default=256)
    args = p.parse_args(argv)

    cli(["condition", "--config", "condition_sweep"])
    bound = condition_bound_max_Nt(args.nx, args.mu)
    print(f"\nNx={args.nx} mu={args.mu:g}: estimated limit N_t <= {bound}")
    print(f"{'N_t':>6}  {'cond(P)':>12}")
    for n, c in product_conditions(args.nx, args.mu, args.max_nt):
        flag = "  (beyond 1/eps)" if c > 1e16 else ""
        print(f"{n:>6}  {c:12.3e}{flag}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
