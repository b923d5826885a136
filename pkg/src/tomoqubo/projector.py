"""Discrete Radon transform as an explicit sparse operator with area-overlap weights.

Each detector bin at each projection angle defines a strip between two
parallel lines; a pixel's weight for that bin is the exact area of the
intersection between the pixel's unit square and the strip, obtained by
clipping the square against the strip's two half-planes.

Conventions: pixel (i, j) is row i, column j; the x axis runs along columns
and y along rows, so angle 0 projects image columns onto bins (bin s collects
column s) and angle 90 projects rows. The detector is centered on the image
center.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .phantom import ImageGrid

# Clipping slivers below this area are numerical noise and are dropped.
WEIGHT_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class ProjectionGeometry:
    """Parallel-beam acquisition description.

    n : image side length in pixels.
    angles : strictly increasing projection angles, degrees in [0, 180).
    n_bins : detector bin count (default n). ceil(n * sqrt(2)) bins keep the
        detector wide enough that oblique angles lose no pixel area.
    bin_width : detector bin width in pixel units.
    """

    n: int
    angles: np.ndarray
    n_bins: int | None = None
    bin_width: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"image side must be >= 1, got {self.n}")
        angles = np.atleast_1d(np.asarray(self.angles, dtype=float))
        if angles.size == 0:
            raise ValueError("at least one projection angle is required")
        if np.any(angles < 0.0) or np.any(angles >= 180.0):
            raise ValueError("angles must lie in [0, 180) degrees")
        if angles.size > 1 and np.any(np.diff(angles) <= 0.0):
            raise ValueError("angles must be strictly increasing")
        angles.setflags(write=False)
        object.__setattr__(self, "angles", angles)
        if self.n_bins is None:
            object.__setattr__(self, "n_bins", self.n)
        if self.n_bins < 1:
            raise ValueError(f"n_bins must be >= 1, got {self.n_bins}")
        if not self.bin_width > 0.0:
            raise ValueError(f"bin_width must be positive, got {self.bin_width}")

    @property
    def n_angles(self) -> int:
        return self.angles.size

    @property
    def n_rows(self) -> int:
        return self.n_angles * self.n_bins


def angles_from_step(dtheta: float) -> np.ndarray:
    """Uniform angle set {0, dtheta, 2*dtheta, ...} below 180 degrees."""
    if not 0.0 < dtheta <= 180.0:
        raise ValueError(f"angle step must be in (0, 180], got {dtheta}")
    return np.arange(0.0, 180.0 - 1e-9, dtheta)


def angles_from_count(count: int) -> np.ndarray:
    """`count` uniform angles starting at 0 with step 180/count."""
    if count < 1:
        raise ValueError(f"angle count must be >= 1, got {count}")
    return np.arange(count) * (180.0 / count)


def wide_bin_count(n: int) -> int:
    """Bin count covering the full image diagonal at unit bin width."""
    return math.ceil(n * math.sqrt(2.0))


@dataclass(frozen=True, eq=False)
class SparseProjector:
    """Row-sparse linear operator from images to sinograms.

    Rows are indexed (angle_index, bin_index) in row-major order and stored
    CSR-style; entries of a row are (pixel_index, weight) with weights equal
    to pixel/strip overlap areas, pixel indices ascending.
    """

    geometry: ProjectionGeometry
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray

    @property
    def n_rows(self) -> int:
        return self.geometry.n_rows

    def row_index(self, angle_index: int, bin_index: int) -> int:
        return angle_index * self.geometry.n_bins + bin_index

    def row(self, angle_index: int, bin_index: int) -> tuple[np.ndarray, np.ndarray]:
        r = self.row_index(angle_index, bin_index)
        lo, hi = self.indptr[r], self.indptr[r + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def as_dense(self) -> np.ndarray:
        """Dense (n_rows, n*n) matrix; intended for small test instances."""
        n2 = self.geometry.n * self.geometry.n
        dense = np.zeros((self.n_rows, n2))
        for r in range(self.n_rows):
            lo, hi = self.indptr[r], self.indptr[r + 1]
            dense[r, self.indices[lo:hi]] = self.weights[lo:hi]
        return dense


@dataclass(frozen=True, eq=False)
class Sinogram:
    """Projection values P(angle, bin) on a fixed acquisition geometry."""

    geometry: ProjectionGeometry
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        expected = (self.geometry.n_angles, self.geometry.n_bins)
        if values.shape != expected:
            raise ValueError(f"sinogram shape {values.shape} != geometry {expected}")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def squared_sum(self) -> float:
        return float(np.sum(self.values ** 2))


def _direction(theta_deg: float) -> tuple[float, float]:
    """Detector-axis unit vector, with axis-aligned angles snapped exact."""
    c = math.cos(math.radians(theta_deg))
    s = math.sin(math.radians(theta_deg))
    if abs(c) < 1e-14:
        c = 0.0
    if abs(s) < 1e-14:
        s = 0.0
    if abs(c - 1.0) < 1e-14:
        c = 1.0
    if abs(s - 1.0) < 1e-14:
        s = 1.0
    return c, s


def _clip_area(corners, c, s, lo, hi) -> float:
    """Area of a convex polygon clipped to the band lo <= c*x + s*y <= hi."""
    poly = corners
    for bound, sign in ((lo, 1.0), (hi, -1.0)):
        clipped = []
        if not poly:
            return 0.0
        px, py = poly[-1]
        dp = sign * (c * px + s * py - bound)
        for qx, qy in poly:
            dq = sign * (c * qx + s * qy - bound)
            if dq >= 0.0:
                if dp < 0.0:
                    t = dp / (dp - dq)
                    clipped.append((px + t * (qx - px), py + t * (qy - py)))
                clipped.append((qx, qy))
            elif dp >= 0.0:
                t = dp / (dp - dq)
                clipped.append((px + t * (qx - px), py + t * (qy - py)))
            px, py, dp = qx, qy, dq
        poly = clipped
    if len(poly) < 3:
        return 0.0
    area = 0.0
    x0, y0 = poly[-1]
    for x1, y1 in poly:
        area += x0 * y1 - x1 * y0
        x0, y0 = x1, y1
    return abs(area) / 2.0


def build_projector(geometry: ProjectionGeometry) -> SparseProjector:
    """Assemble the sparse Radon operator for a geometry.

    For each (angle, bin) the strip between two lines perpendicular to the
    projection direction is intersected with every candidate pixel square;
    the exact overlap areas become the row weights. Weights below
    ``WEIGHT_FLOOR`` are dropped.
    """
    n, n_bins, w = geometry.n, geometry.n_bins, geometry.bin_width
    half = n / 2.0
    indptr = [0]
    indices: list[int] = []
    weights: list[float] = []
    for theta in geometry.angles:
        c, s = _direction(float(theta))
        # Detector origin: bin b spans [t0 + b*w, t0 + (b+1)*w] along the axis.
        t0 = half * (c + s) - (n_bins / 2.0) * w
        rows: list[list[tuple[int, float]]] = [[] for _ in range(n_bins)]
        for i in range(n):
            y0, y1 = float(i), float(i + 1)
            for j in range(n):
                x0, x1 = float(j), float(j + 1)
                ts = (c * x0 + s * y0, c * x1 + s * y0,
                      c * x1 + s * y1, c * x0 + s * y1)
                tmin, tmax = min(ts), max(ts)
                b_lo = max(0, int(math.floor((tmin - t0) / w)))
                b_hi = min(n_bins - 1, int(math.ceil((tmax - t0) / w)))
                if b_lo > b_hi:
                    continue
                corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
                pixel = i * n + j
                for b in range(b_lo, b_hi + 1):
                    lo = t0 + b * w
                    area = _clip_area(corners, c, s, lo, lo + w)
                    if area >= WEIGHT_FLOOR:
                        rows[b].append((pixel, area))
        for row in rows:
            for pixel, area in row:
                indices.append(pixel)
                weights.append(area)
            indptr.append(len(indices))
    return SparseProjector(
        geometry=geometry,
        indptr=np.asarray(indptr, dtype=np.int64),
        indices=np.asarray(indices, dtype=np.int64),
        weights=np.asarray(weights, dtype=float),
    )


def forward_project(projector: SparseProjector, image: ImageGrid) -> Sinogram:
    """Apply the operator: each sinogram entry is the weighted pixel sum of its row."""
    geo = projector.geometry
    if image.n_rows != geo.n or image.n_cols != geo.n:
        raise ValueError(
            f"image is {image.n_rows}x{image.n_cols}, geometry expects {geo.n}x{geo.n}")
    x = np.asarray(image.values, dtype=float).ravel()
    out = np.empty(projector.n_rows)
    for r in range(projector.n_rows):
        lo, hi = projector.indptr[r], projector.indptr[r + 1]
        out[r] = np.dot(projector.weights[lo:hi], x[projector.indices[lo:hi]])
    return Sinogram(geometry=geo, values=out.reshape(geo.n_angles, geo.n_bins))


def write_sinogram_csv(sinogram: Sinogram, path) -> None:
    """First line lists the angles; then one comma-separated line per angle."""
    lines = ["# angles: " + ",".join(repr(float(a)) for a in sinogram.geometry.angles)]
    for row in sinogram.values:
        lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_sinogram_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Returns (angles, values); pair with a geometry to rebuild a Sinogram."""
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("# angles:"):
        raise ValueError(f"{path} is missing the '# angles:' header")
    angles = np.array([float(t) for t in text[0].split(":", 1)[1].split(",")])
    values = np.array([[float(t) for t in line.split(",")]
                       for line in text[1:] if line.strip()])
    if values.shape[0] != angles.size:
        raise ValueError(f"{path}: {values.shape[0]} rows for {angles.size} angles")
    return angles, values


def save_geometry(geometry: ProjectionGeometry, path) -> None:
    data = {
        "n": geometry.n,
        "angles": [float(a) for a in geometry.angles],
        "n_bins": geometry.n_bins,
        "bin_width": geometry.bin_width,
    }
    Path(path).write_text(json.dumps(data, indent=1) + "\n")


def load_geometry(path) -> ProjectionGeometry:
    data = json.loads(Path(path).read_text())
    return ProjectionGeometry(
        n=data["n"],
        angles=np.asarray(data["angles"], dtype=float),
        n_bins=data["n_bins"],
        bin_width=data["bin_width"],
    )
