"""Command-line front end: every stage boundary is an on-disk artifact.

Subcommands mirror the processing stages (phantom, project, build-qubo,
to-ising, solve, reconstruct, compare, calibrate) plus an end-to-end
`pipeline`. Each run is reproducible from its seed: no artifact contains
wall-clock data, and `pipeline` records its fully resolved configuration
in run.json.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, asdict, fields
from pathlib import Path

import numpy as np

from . import phantom as ph
from . import projector as pj
from . import qubo as qb
from . import ising as isg
from . import solver as sv
from . import recon as rc
from . import preprocess as pp


@dataclass(frozen=True)
class PipelineConfig:
    """Fully resolved end-to-end run description; JSON round-trippable."""

    n: int = 8
    mode: str = "binary"
    levels: int | None = None
    image: str | None = None
    angles: list | None = None
    angle_step: float | None = None
    angle_count: int | None = None
    n_bins: int | None = None
    wide_bins: bool = False
    bin_width: float = 1.0
    bits_per_pixel: int = 1
    solver: str = "anneal"
    sweeps: int | None = None
    beta_start: float = 0.1
    beta_end: float = 10.0
    restarts: int = 32
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def _resolve_angles(angles, angle_step, angle_count, default_count):
    given = [x for x in (angles, angle_step, angle_count) if x is not None]
    if len(given) > 1:
        raise ValueError("give only one of angles / angle-step / angle-count")
    if angles is not None:
        return np.asarray([float(a) for a in angles])
    if angle_step is not None:
        return pj.angles_from_step(angle_step)
    if angle_count is not None:
        return pj.angles_from_count(angle_count)
    return pj.angles_from_count(default_count)


def _geometry_from(n, cfg_angles, angle_step, angle_count, n_bins,
                   wide_bins, bin_width) -> pj.ProjectionGeometry:
    angles = _resolve_angles(cfg_angles, angle_step, angle_count, n)
    if n_bins is None and wide_bins:
        n_bins = pj.wide_bin_count(n)
    return pj.ProjectionGeometry(n=n, angles=angles, n_bins=n_bins,
                                 bin_width=bin_width)


def _read_image(path) -> ph.ImageGrid:
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return ph.read_image_pgm(path)
    return ph.read_image_csv(path)


def _write_image(image: ph.ImageGrid, out_dir: Path, name: str,
                 fmt: str, bit_depth: int | None = None) -> None:
    ph.write_image_csv(image, out_dir / f"{name}.csv")
    if fmt == "pgm":
        ph.write_image_pgm(image, out_dir / f"{name}.pgm", bit_depth=bit_depth)


def _make_phantom(cfg: PipelineConfig) -> ph.ImageGrid:
    if cfg.mode == "random":
        return ph.make_random_image(cfg.n, bit_depth=cfg.bits_per_pixel,
                                    seed=cfg.seed)
    return ph.make_shepp_logan(cfg.n, mode=cfg.mode, levels=cfg.levels)


def _solve(model: qb.QuboModel, cfg: PipelineConfig) -> sv.SolveResult:
    if cfg.solver == "exhaustive":
        return sv.solve_exhaustive(model)
    if cfg.solver == "anneal":
        sweeps = (200 * model.num_variables if cfg.sweeps is None
                  else cfg.sweeps)
        schedule = sv.AnnealSchedule(
            sweeps=sweeps, beta_start=cfg.beta_start, beta_end=cfg.beta_end,
            restarts=cfg.restarts, seed=cfg.seed)
        return sv.solve_anneal(model, schedule)
    if cfg.solver == "bitflip":
        start = np.zeros(model.num_variables, dtype=np.int8)
        return sv.solve_bitflip(model, start)
    raise ValueError(f"unknown solver '{cfg.solver}'")


def cmd_phantom(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.mode == "random":
        image = ph.make_random_image(args.n, bit_depth=args.bit_depth,
                                     seed=args.seed)
        depth = args.bit_depth
    else:
        image = ph.make_shepp_logan(args.n, mode=args.mode, levels=args.levels)
        depth = None
    ph.write_image_csv(image, out / f"{args.name}.csv")
    ph.write_image_pgm(image, out / f"{args.name}.pgm", bit_depth=depth)
    print(out / f"{args.name}.csv")
    return 0


def cmd_project(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    image = _read_image(args.image)
    if image.n_rows != image.n_cols:
        raise ValueError("projection needs a square image")
    angles = None if args.angles is None else args.angles.split(",")
    geometry = _geometry_from(image.n_rows, angles, args.angle_step,
                              args.angle_count, args.n_bins, args.wide_bins,
                              args.bin_width)
    sino = pj.forward_project(pj.build_projector(geometry), image)
    pj.write_sinogram_csv(sino, out / f"{args.name}.csv")
    pj.save_geometry(geometry, out / "geometry.json")
    print(out / f"{args.name}.csv")
    return 0


def cmd_build_qubo(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    geometry = pj.load_geometry(args.geometry)
    angles, values = pj.read_sinogram_csv(args.sinogram)
    if not np.allclose(angles, geometry.angles, atol=1e-9):
        raise ValueError("sinogram angles do not match the geometry file")
    sino = pj.Sinogram(geometry=geometry, values=values)
    model = qb.build_qubo(pj.build_projector(geometry), sino,
                          bits_per_pixel=args.bits)
    qb.save_qubo(model, out / f"{args.name}.json")
    print(out / f"{args.name}.json")
    return 0


def cmd_to_ising(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model = qb.load_qubo(args.qubo)
    isg.save_ising(isg.to_ising(model), out / f"{args.name}.json")
    print(out / f"{args.name}.json")
    return 0


def cmd_solve(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model = qb.load_qubo(args.qubo)
    if args.solver == "exhaustive":
        result = sv.solve_exhaustive(model)
    elif args.solver == "anneal":
        sweeps = (200 * model.num_variables if args.sweeps is None
                  else args.sweeps)
        schedule = sv.AnnealSchedule(
            sweeps=sweeps, beta_start=args.beta_start, beta_end=args.beta_end,
            restarts=args.restarts, seed=args.seed)
        result = sv.solve_anneal(model, schedule)
    else:
        if args.start is not None:
            start = sv.load_result(args.start).best_assignment
        else:
            start = np.zeros(model.num_variables, dtype=np.int8)
        result = sv.solve_bitflip(model, start)
    sv.save_result(result, out / f"{args.name}.json")
    print(f"{result.solver_name}: best energy {result.best_energy} "
          f"({result.occurrences}/{result.samples_total} at best)")
    print(out / f"{args.name}.json")
    return 0


def cmd_reconstruct(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = sv.load_result(args.solution)
    encoding = qb.BitEncoding(n=args.n, bits_per_pixel=args.bits)
    image = rc.reconstruct(result, encoding)
    _write_image(image, out, args.name, args.format, bit_depth=args.bits)
    print(out / f"{args.name}.csv")
    return 0


def cmd_compare(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    image = _read_image(args.image)
    reference = _read_image(args.reference)
    report = rc.compare(image, reference,
                        energy_achieved=args.energy_achieved,
                        energy_expected=args.energy_expected)
    rc.save_report(report, out / "report.json")
    diff = rc.difference_image(image, reference)
    rc.write_difference_csv(diff, out / "difference.csv")
    if args.format == "pgm":
        rc.write_difference_pgm(diff, out / "difference.pgm")
    print(f"mismatched pixels: {report.mismatched_pixels} "
          f"(fraction {report.pixel_mismatch_fraction:.4f})")
    print(out / "report.json")
    return 0


def cmd_calibrate(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    raw = pp.load_raw_set(args.manifest)
    raw = pp.subtract_air_background(raw)
    raw = pp.beer_lambert_correct(raw, args.reference_intensity)
    sino, clamped = pp.frames_to_sinogram(raw, args.axial_level, n=args.n)
    pj.write_sinogram_csv(sino, out / f"{args.name}.csv")
    pj.save_geometry(sino.geometry, out / "geometry.json")
    if clamped:
        print(f"clamped {clamped} negative entries to zero", file=sys.stderr)
    print(out / f"{args.name}.csv")
    return 0


def run_pipeline(cfg: PipelineConfig, out_dir, fmt: str = "csv") -> rc.ReconReport:
    """Phantom/ingest -> project -> quadratic model -> solve -> reconstruct
    -> compare, with every intermediate written to out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "run.json").write_text(
        json.dumps({"config": asdict(cfg)}, sort_keys=True) + "\n")

    if cfg.image is not None:
        image = _read_image(cfg.image)
        if image.n_rows != image.n_cols:
            raise ValueError("pipeline needs a square input image")
        n = image.n_rows
    else:
        image = _make_phantom(cfg)
        n = cfg.n
    _write_image(image, out, "phantom", fmt, bit_depth=cfg.bits_per_pixel)

    geometry = _geometry_from(n, cfg.angles, cfg.angle_step, cfg.angle_count,
                              cfg.n_bins, cfg.wide_bins, cfg.bin_width)
    pj.save_geometry(geometry, out / "geometry.json")
    projector = pj.build_projector(geometry)
    sino = pj.forward_project(projector, image)
    pj.write_sinogram_csv(sino, out / "sinogram.csv")

    model = qb.build_qubo(projector, sino, bits_per_pixel=cfg.bits_per_pixel)
    qb.save_qubo(model, out / "qubo.json")
    isg.save_ising(isg.to_ising(model), out / "ising.json")

    result = _solve(model, cfg)
    sv.save_result(result, out / "solution.json")

    encoding = qb.BitEncoding(n=n, bits_per_pixel=cfg.bits_per_pixel)
    reconstructed = rc.reconstruct(result, encoding)
    _write_image(reconstructed, out, "reconstruction", fmt,
                 bit_depth=cfg.bits_per_pixel)

    report = rc.compare(reconstructed, image,
                        energy_achieved=result.best_energy,
                        energy_expected=-model.offset)
    rc.save_report(report, out / "report.json")
    diff = rc.difference_image(reconstructed, image)
    rc.write_difference_csv(diff, out / "difference.csv")
    if fmt == "pgm":
        rc.write_difference_pgm(diff, out / "difference.pgm")
    return report


def cmd_pipeline(args) -> int:
    if args.config is not None:
        base = PipelineConfig.from_dict(json.loads(Path(args.config).read_text()))
    else:
        base = PipelineConfig()
    overrides = {}
    for name in ("n", "mode", "levels", "image", "angle_step", "angle_count",
                 "n_bins", "bin_width", "bits_per_pixel", "solver", "sweeps",
                 "beta_start", "beta_end", "restarts"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.angles is not None:
        overrides["angles"] = [float(a) for a in args.angles.split(",")]
    if args.wide_bins:
        overrides["wide_bins"] = True
    overrides["seed"] = args.seed
    cfg = PipelineConfig.from_dict({**asdict(base), **overrides})

    report = run_pipeline(cfg, args.out_dir, fmt=args.format)
    header = f"{'expected lowest energy':>24} {'achieved energy':>18} {'relative error':>15}"
    print(header)
    print(f"{report.energy_expected:>24.6f} {report.energy_achieved:>18.6f} "
          f"{report.energy_relative_error:>15.3e}")
    n2 = report.reconstructed.values.size
    print(f"pixel mismatches: {report.mismatched_pixels} / {n2} "
          f"(fraction {report.pixel_mismatch_fraction:.4f})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tomoqubo",
        description="CT reconstruction from sinograms via binary quadratic "
                    "energy minimization")
    parser.add_argument("--seed", type=int, default=0,
                        help="master seed for every stochastic stage")
    parser.add_argument("--out-dir", default=".", help="artifact directory")
    parser.add_argument("--format", choices=("csv", "pgm"), default="csv",
                        help="raster output format (CSV always written)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="generate a test image")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("binary", "quantized", "random"),
                   default="binary")
    p.add_argument("--levels", type=int, default=None,
                   help="gray levels for quantized mode (power of two)")
    p.add_argument("--bit-depth", type=int, default=1,
                   help="bit depth for random mode")
    p.add_argument("--name", default="phantom")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("project", help="forward-project an image")
    p.add_argument("--image", required=True)
    p.add_argument("--angles", default=None, help="comma-separated degrees")
    p.add_argument("--angle-step", type=float, default=None)
    p.add_argument("--angle-count", type=int, default=None)
    p.add_argument("--n-bins", type=int, default=None)
    p.add_argument("--wide-bins", action="store_true",
                   help="use ceil(n*sqrt(2)) detector bins")
    p.add_argument("--bin-width", type=float, default=1.0)
    p.add_argument("--name", default="sinogram")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("build-qubo",
                       help="expand a sinogram into a binary quadratic model")
    p.add_argument("--sinogram", required=True)
    p.add_argument("--geometry", required=True)
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--name", default="qubo")
    p.set_defaults(func=cmd_build_qubo)

    p = sub.add_parser("to-ising", help="convert a model to spin variables")
    p.add_argument("--qubo", required=True)
    p.add_argument("--name", default="ising")
    p.set_defaults(func=cmd_to_ising)

    p = sub.add_parser("solve", help="minimize a model")
    p.add_argument("--qubo", required=True)
    p.add_argument("--solver", choices=("exhaustive", "anneal", "bitflip"),
                   default="anneal")
    p.add_argument("--sweeps", type=int, default=None)
    p.add_argument("--beta-start", type=float, default=0.1)
    p.add_argument("--beta-end", type=float, default=10.0)
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--start", default=None,
                   help="solution JSON seeding the bitflip start state")
    p.add_argument("--name", default="solution")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("reconstruct", help="decode a solution into an image")
    p.add_argument("--solution", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--name", default="reconstruction")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("compare", help="score an image against a reference")
    p.add_argument("--image", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--energy-achieved", type=float, default=0.0)
    p.add_argument("--energy-expected", type=float, default=0.0)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("calibrate",
                       help="raw intensity frames -> calibrated sinogram")
    p.add_argument("--manifest", required=True)
    p.add_argument("--axial-level", type=int, required=True)
    p.add_argument("--reference-intensity", type=float, required=True)
    p.add_argument("--n", type=int, default=None,
                   help="reconstruction grid side (default: detector width)")
    p.add_argument("--name", default="sinogram")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("pipeline", help="run every stage end to end")
    p.add_argument("--config", default=None, help="pipeline config JSON")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--mode", choices=("binary", "quantized", "random"),
                   default=None)
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--image", default=None)
    p.add_argument("--angles", default=None)
    p.add_argument("--angle-step", type=float, default=None)
    p.add_argument("--angle-count", type=int, default=None)
    p.add_argument("--n-bins", type=int, default=None)
    p.add_argument("--wide-bins", action="store_true")
    p.add_argument("--bin-width", type=float, default=None)
    p.add_argument("--bits-per-pixel", type=int, default=None)
    p.add_argument("--solver", choices=("exhaustive", "anneal", "bitflip"),
                   default=None)
    p.add_argument("--sweeps", type=int, default=None)
    p.add_argument("--beta-start", type=float, default=None)
    p.add_argument("--beta-end", type=float, default=None)
    p.add_argument("--restarts", type=int, default=None)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        out = Path(args.out_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(json.dumps(
                {"error": type(exc).__name__, "message": str(exc)}) + "\n")
        except OSError:
            pass
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
