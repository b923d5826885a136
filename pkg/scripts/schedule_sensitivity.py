#!/usr/bin/env python3
"""Ground-state hit rate versus annealing sweep budget.

Fixes one reconstruction instance and sweeps the number of annealing sweeps
over a log grid, reporting how many restarts reach the energy floor at each
budget. Useful for picking a default schedule: the hit rate typically rises
sharply once the budget crosses a few hundred sweeps per variable.

Usage:
    python3 scripts/schedule_sensitivity.py
    python3 scripts/schedule_sensitivity.py --n 16 --angles 10 --restarts 16
"""

import argparse
import sys
import time

import numpy as np

from tomoqubo.phantom import make_shepp_logan
from tomoqubo.projector import (ProjectionGeometry, angles_from_count,
                                build_projector, forward_project,
                                wide_bin_count)
from tomoqubo.qubo import build_qubo
from tomoqubo.solver import AnnealSchedule, solve_anneal


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=12, help="phantom side length")
    ap.add_argument("--angles", type=int, default=12, help="projection count")
    ap.add_argument("--bits", type=int, default=1)
    ap.add_argument("--restarts", type=int, default=32)
    ap.add_argument("--budgets", default=None,
                    help="comma-separated sweeps-per-variable values "
                         "(default: 5,10,25,50,100,200,400)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    image = make_shepp_logan(args.n, mode="binary")
    geometry = ProjectionGeometry(n=args.n,
                                  angles=angles_from_count(args.angles),
                                  n_bins=wide_bin_count(args.n))
    projector = build_projector(geometry)
    target = forward_project(projector, image)
    model = build_qubo(projector, target, bits_per_pixel=args.bits)
    floor = -model.offset
    tol = 1e-9 * max(1.0, model.offset)

    if args.budgets is not None:
        budgets = [int(b) for b in args.budgets.split(",")]
    else:
        budgets = [5, 10, 25, 50, 100, 200, 400]

    print(f"instance: {args.n}x{args.n} binary, {args.angles} angles, "
          f"V={model.num_variables}, floor={floor:.4f}")
    print(f"{'sweeps/var':>11} {'sweeps':>8} {'hits':>9} {'best gap':>12} {'sec':>7}")
    for per_var in budgets:
        schedule = AnnealSchedule(sweeps=per_var * model.num_variables,
                                  beta_start=0.1, beta_end=10.0,
                                  restarts=args.restarts, seed=args.seed)
        start = time.perf_counter()
        result = solve_anneal(model, schedule)
        elapsed = time.perf_counter() - start
        gap = result.best_energy - floor
        hits = result.occurrences if gap < tol else 0
        print(f"{per_var:>11d} {schedule.sweeps:>8d} "
              f"{hits:>4d}/{result.samples_total:<4d} {gap:>12.4e} "
              f"{elapsed:>7.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
