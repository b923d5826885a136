"""Decode solver output into images and score them against ground truth.

Two quality readings are reported side by side: an image-level pixel
mismatch count (exact integer comparison, since encodings are integral)
and an energy-level relative error against the expected lowest energy
(-offset). They answer different questions and are both kept.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .phantom import ImageGrid, write_matrix_csv
from .qubo import BitEncoding, decode
from .solver import SolveResult


@dataclass(frozen=True, eq=False)
class ReconReport:
    """Reconstruction scorecard; mismatch fields are None when no reference
    image is available (energy metrics are always present)."""

    reconstructed: ImageGrid
    reference: ImageGrid | None
    mismatched_pixels: int | None
    max_abs_diff: float | None
    pixel_mismatch_fraction: float | None
    energy_achieved: float
    energy_expected: float
    energy_relative_error: float

    def __post_init__(self):
        if self.reference is not None:
            n2 = self.reconstructed.values.size
            if self.mismatched_pixels is None:
                raise ValueError("mismatch fields required with a reference")
            if abs(self.pixel_mismatch_fraction
                   - self.mismatched_pixels / n2) > 1e-12:
                raise ValueError("pixel_mismatch_fraction != mismatched/n^2")
            if self.mismatched_pixels == 0 and self.max_abs_diff != 0:
                raise ValueError("zero mismatches but nonzero max_abs_diff")
        expected_rel = (abs(self.energy_achieved - self.energy_expected)
                        / max(1.0, abs(self.energy_expected)))
        if abs(self.energy_relative_error - expected_rel) > 1e-12:
            raise ValueError("energy_relative_error inconsistent with energies")


def reconstruct(result: SolveResult, encoding: BitEncoding) -> ImageGrid:
    """Decode the best assignment into an n x n image."""
    return decode(encoding, result.best_assignment)


def _rounded(image: ImageGrid) -> np.ndarray:
    return np.rint(np.asarray(image.values)).astype(np.int64)


def compare(reconstructed: ImageGrid, reference: ImageGrid,
            energy_achieved: float, energy_expected: float) -> ReconReport:
    """Score a reconstruction against a reference image.

    Pixel comparison happens on integer-rounded grids (the encoding is
    integral; real-valued references get the same quantization).
    """
    a = _rounded(reconstructed)
    b = _rounded(reference)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    diff = a - b
    mismatched = int(np.count_nonzero(diff))
    return ReconReport(
        reconstructed=reconstructed,
        reference=reference,
        mismatched_pixels=mismatched,
        max_abs_diff=float(np.max(np.abs(diff))),
        pixel_mismatch_fraction=mismatched / a.size,
        energy_achieved=float(energy_achieved),
        energy_expected=float(energy_expected),
        energy_relative_error=(abs(energy_achieved - energy_expected)
                               / max(1.0, abs(energy_expected))),
    )


def energy_report(reconstructed: ImageGrid, energy_achieved: float,
                  energy_expected: float) -> ReconReport:
    """Report without a reference image (measured-data pipelines)."""
    return ReconReport(
        reconstructed=reconstructed,
        reference=None,
        mismatched_pixels=None,
        max_abs_diff=None,
        pixel_mismatch_fraction=None,
        energy_achieved=float(energy_achieved),
        energy_expected=float(energy_expected),
        energy_relative_error=(abs(energy_achieved - energy_expected)
                               / max(1.0, abs(energy_expected))),
    )


def difference_image(reconstructed: ImageGrid,
                     reference: ImageGrid) -> np.ndarray:
    """Signed per-pixel difference (reconstructed - reference)."""
    a = np.asarray(reconstructed.values, dtype=float)
    b = np.asarray(reference.values, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a - b


def write_difference_pgm(diff: np.ndarray, path) -> None:
    """Zero-centered PGM: gray value = M + d with M = ceil(max|d|) (min 1),
    maxval = 2M, so zero difference renders mid-gray, negative dark,
    positive bright."""
    d = np.rint(np.asarray(diff)).astype(np.int64)
    m = max(1, int(np.max(np.abs(d))))
    shifted = d + m
    lines = ["P2", f"{d.shape[1]} {d.shape[0]}", f"{2 * m}"]
    for row in shifted:
        lines.append(" ".join(str(int(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_difference_csv(diff: np.ndarray, path) -> None:
    write_matrix_csv(np.asarray(diff), path)


def save_report(report: ReconReport, path) -> None:
    data = {
        "mismatched_pixels": report.mismatched_pixels,
        "max_abs_diff": report.max_abs_diff,
        "pixel_mismatch_fraction": report.pixel_mismatch_fraction,
        "energy_achieved": report.energy_achieved,
        "energy_expected": report.energy_expected,
        "energy_relative_error": report.energy_relative_error,
    }
    Path(path).write_text(json.dumps(data, indent=1) + "\n")
