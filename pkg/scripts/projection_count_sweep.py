#!/usr/bin/env python3
"""Reconstruction quality versus number of projection angles.

For a fixed phantom, sweep the angle count downward and record whether the
annealer still reaches the algebraic energy floor -sum(P^2) and a pixel-exact
image. The interesting regime is angle counts below the image side length,
where the linear system alone is underdetermined but the binary/low-bit pixel
constraint can still pin down the exact image.

Usage:
    python3 scripts/projection_count_sweep.py
    python3 scripts/projection_count_sweep.py --n 16 --angle-counts 16,12,10,8,6
    python3 scripts/projection_count_sweep.py --mode quantized --levels 4 \
        --bits 2 --out sweep.csv
"""

import argparse
import csv
import sys
import time

import numpy as np

from tomoqubo.phantom import make_shepp_logan
from tomoqubo.projector import (ProjectionGeometry, angles_from_count,
                                build_projector, forward_project,
                                wide_bin_count)
from tomoqubo.qubo import BitEncoding, build_qubo
from tomoqubo.recon import compare, reconstruct
from tomoqubo.solver import default_schedule, solve_anneal


def run_one(image, n_angles, bits, seed, restarts):
    n = image.n_rows
    geometry = ProjectionGeometry(n=n, angles=angles_from_count(n_angles),
                                  n_bins=wide_bin_count(n))
    projector = build_projector(geometry)
    target = forward_project(projector, image)
    model = build_qubo(projector, target, bits_per_pixel=bits)

    start = time.perf_counter()
    result = solve_anneal(model, default_schedule(
        model.num_variables, seed=seed, restarts=restarts))
    elapsed = time.perf_counter() - start

    report = compare(reconstruct(result, BitEncoding(n=n, bits_per_pixel=bits)),
                     image, energy_achieved=result.best_energy,
                     energy_expected=-model.offset)
    return {
        "angles": n_angles,
        "variables": model.num_variables,
        "expected": -model.offset,
        "achieved": result.best_energy,
        "rel_energy_err": report.energy_relative_error,
        "mismatched_pixels": report.mismatched_pixels,
        "hits": result.occurrences,
        "restarts": result.samples_total,
        "seconds": elapsed,
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=16, help="phantom side length")
    ap.add_argument("--mode", choices=("binary", "quantized"), default="binary")
    ap.add_argument("--levels", type=int, default=None,
                    help="gray levels for quantized mode")
    ap.add_argument("--bits", type=int, default=1, help="bits per pixel")
    ap.add_argument("--angle-counts", default=None,
                    help="comma-separated counts (default: n, ..., down to 4)")
    ap.add_argument("--restarts", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="optional CSV output path")
    args = ap.parse_args(argv)

    image = make_shepp_logan(args.n, mode=args.mode, levels=args.levels)
    if args.angle_counts is not None:
        counts = [int(c) for c in args.angle_counts.split(",")]
    else:
        counts = list(range(args.n, 3, -2))

    header = (f"{'angles':>7} {'vars':>5} {'expected':>14} {'achieved':>14} "
              f"{'rel_err':>10} {'mismatch':>9} {'hits':>9} {'sec':>7}")
    print(f"phantom: {args.mode} {args.n}x{args.n}, {args.bits} bit(s)/pixel, "
          f"{args.restarts} restarts, seed {args.seed}")
    print(header)
    rows = []
    for n_angles in counts:
        row = run_one(image, n_angles, args.bits, args.seed, args.restarts)
        rows.append(row)
        print(f"{row['angles']:>7d} {row['variables']:>5d} "
              f"{row['expected']:>14.4f} {row['achieved']:>14.4f} "
              f"{row['rel_energy_err']:>10.2e} {row['mismatched_pixels']:>9d} "
              f"{row['hits']:>4d}/{row['restarts']:<4d} {row['seconds']:>7.2f}")

    if args.out is not None:
        with open(args.out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
