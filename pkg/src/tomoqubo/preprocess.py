"""Calibration of raw X-ray intensity frames into Radon-domain sinograms.

The fixed order is: subtract the air background (mean of a sample-free
detector region, per frame), apply the Beer-Lambert negative logarithm
against a reference intensity, then slice one detector row per frame into
a sinogram. Applied to noiseless simulated intensities I0*exp(-Ax) the
composition recovers A@x.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .phantom import read_matrix_csv, read_image_pgm
from .projector import ProjectionGeometry, Sinogram

# Floor for the logarithm, relative to the reference intensity: pixels at or
# below zero transmission get clamped instead of producing -inf/NaN.
LOG_FLOOR_RELATIVE = 1e-9


@dataclass(frozen=True, eq=False)
class RawProjectionSet:
    """Angle-ordered stack of detector frames.

    frames : (n_angles, frame_rows, frame_cols) real intensities.
    angles : matching strictly increasing angle sequence, degrees.
    air_region : (r0, r1, c0, c1) half-open row/col bounds of a region known
        to contain no sample, or None when unavailable.
    """

    frames: np.ndarray
    angles: np.ndarray
    air_region: tuple[int, int, int, int] | None = None

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=float)
        if frames.ndim != 3:
            raise ValueError(f"frames must be 3-D, got shape {frames.shape}")
        angles = np.atleast_1d(np.asarray(self.angles, dtype=float))
        if angles.size != frames.shape[0]:
            raise ValueError(
                f"{frames.shape[0]} frames but {angles.size} angles")
        if angles.size > 1 and np.any(np.diff(angles) <= 0.0):
            raise ValueError("angles must be strictly increasing")
        if self.air_region is not None:
            r0, r1, c0, c1 = self.air_region
            rows, cols = frames.shape[1], frames.shape[2]
            if not (0 <= r0 < r1 <= rows and 0 <= c0 < c1 <= cols):
                raise ValueError(
                    f"air_region {self.air_region} outside frame bounds "
                    f"({rows}, {cols}) or empty")
        frames = frames.copy()
        frames.setflags(write=False)
        angles = angles.copy()
        angles.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "angles", angles)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


def subtract_air_background(raw: RawProjectionSet) -> RawProjectionSet:
    """Per frame, shift intensities so the air region averages to zero."""
    if raw.air_region is None:
        raise ValueError("background subtraction needs a non-empty air_region")
    r0, r1, c0, c1 = raw.air_region
    air_means = raw.frames[:, r0:r1, c0:c1].mean(axis=(1, 2))
    shifted = raw.frames - air_means[:, None, None]
    return RawProjectionSet(frames=shifted, angles=raw.angles,
                            air_region=raw.air_region)


def beer_lambert_correct(raw: RawProjectionSet,
                         reference_intensity: float) -> RawProjectionSet:
    """Intensity -> line integral: p -> -ln(max(p, eps) / I0).

    eps = LOG_FLOOR_RELATIVE * I0 keeps zero-transmission pixels finite.
    """
    if not reference_intensity > 0.0:
        raise ValueError(
            f"reference intensity must be positive, got {reference_intensity}")
    eps = LOG_FLOOR_RELATIVE * reference_intensity
    corrected = -np.log(np.maximum(raw.frames, eps) / reference_intensity)
    return RawProjectionSet(frames=corrected, angles=raw.angles,
                            air_region=raw.air_region)


def frames_to_sinogram(raw: RawProjectionSet, axial_level: int,
                       n: int | None = None) -> tuple[Sinogram, int]:
    """Stack detector row `axial_level` of every frame into a sinogram.

    Negative entries (possible after background subtraction) are clamped to
    zero; the second return value counts the clamped entries. `n` is the
    reconstruction grid side for the attached geometry and defaults to the
    detector width (the square-sample convention).
    """
    rows = raw.frames.shape[1]
    if not 0 <= axial_level < rows:
        raise ValueError(
            f"axial level {axial_level} outside frame rows [0, {rows})")
    values = raw.frames[:, axial_level, :].copy()
    clamped = int(np.count_nonzero(values < 0.0))
    values = np.maximum(values, 0.0)
    n_bins = values.shape[1]
    geometry = ProjectionGeometry(
        n=n_bins if n is None else n, angles=raw.angles, n_bins=n_bins)
    return Sinogram(geometry=geometry, values=values), clamped


def entry_mask_to_row_mask(keep: np.ndarray,
                           geometry: ProjectionGeometry) -> np.ndarray:
    """(n_angles, n_bins) boolean keep-mask -> flat operator row mask.

    This is the hook for deleting corrupted detector readings (dense
    inclusions, ring-artifact pixels): masked-out entries drop out of the
    quadratic model entirely via build_qubo's row_mask.
    """
    keep = np.asarray(keep, dtype=bool)
    expected = (geometry.n_angles, geometry.n_bins)
    if keep.shape != expected:
        raise ValueError(f"mask shape {keep.shape} != geometry {expected}")
    return keep.ravel()


def simulate_intensity_frames(sinogram: Sinogram, reference_intensity: float,
                              pad_rows: int = 1,
                              baseline: float = 0.0) -> RawProjectionSet:
    """Synthesize detector frames from a clean sinogram for round-trip tests.

    Each frame holds the Beer-Lambert intensity I0*exp(-P) of its angle's
    projection row, replicated across `pad_rows` axial rows, on top of a
    constant detector pedestal `baseline`. The air region is a final
    beam-free row recording only the pedestal, so background subtraction
    removes exactly `baseline` and the negative logarithm against I0
    recovers the sinogram.
    """
    if not reference_intensity > 0.0:
        raise ValueError(
            f"reference intensity must be positive, got {reference_intensity}")
    intens = baseline + reference_intensity * np.exp(-sinogram.values)
    dark = np.full(sinogram.geometry.n_bins, baseline)
    frames = np.stack([
        np.vstack([np.tile(row, (pad_rows, 1)), dark]) for row in intens])
    rows = pad_rows + 1
    return RawProjectionSet(
        frames=frames,
        angles=sinogram.geometry.angles,
        air_region=(rows - 1, rows, 0, sinogram.geometry.n_bins))


def load_raw_set(manifest_path) -> RawProjectionSet:
    """Read a frame directory via its JSON manifest.

    Manifest fields: "angles" (list), "air_region" ([r0, r1, c0, c1] or
    null), optional "frames" (file names relative to the manifest; defaults
    to all .csv/.pgm files in the directory, sorted).
    """
    manifest_path = Path(manifest_path)
    data = json.loads(manifest_path.read_text())
    base = manifest_path.parent
    if "frames" in data:
        paths = [base / name for name in data["frames"]]
    else:
        paths = sorted(p for p in base.iterdir()
                       if p.suffix.lower() in (".csv", ".pgm"))
    frames = []
    for p in paths:
        if p.suffix.lower() == ".pgm":
            frames.append(np.asarray(read_image_pgm(p).values, dtype=float))
        else:
            frames.append(np.asarray(read_matrix_csv(p), dtype=float))
    if not frames:
        raise ValueError(f"no frame files found next to {manifest_path}")
    air = data.get("air_region")
    return RawProjectionSet(
        frames=np.stack(frames),
        angles=np.asarray(data["angles"], dtype=float),
        air_region=None if air is None else tuple(int(x) for x in air))
