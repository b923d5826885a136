"""Reference test images: Shepp-Logan variants, random grids, and image file I/O."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Ten-ellipse head phantom, high-contrast variant.
# Columns: additive intensity, x center, y center, x semi-axis, y semi-axis,
# rotation (degrees, counter-clockwise). Coordinates live in [-1, 1]^2.
_ELLIPSES = np.array([
    [1.0,   0.0,    0.0,     0.69,   0.92,    0.0],
    [-0.8,  0.0,   -0.0184,  0.6624, 0.874,   0.0],
    [-0.2,  0.22,   0.0,     0.11,   0.31,  -18.0],
    [-0.2, -0.22,   0.0,     0.16,   0.41,   18.0],
    [0.1,   0.0,    0.35,    0.21,   0.25,    0.0],
    [0.1,   0.0,    0.1,     0.046,  0.046,   0.0],
    [0.1,   0.0,   -0.1,     0.046,  0.046,   0.0],
    [0.1,  -0.08,  -0.605,   0.046,  0.023,   0.0],
    [0.1,   0.0,   -0.605,   0.023,  0.023,   0.0],
    [0.1,   0.06,  -0.605,   0.023,  0.046,   0.0],
])


@dataclass(frozen=True, eq=False)
class ImageGrid:
    """Dense raster of non-negative pixel values (attenuation numbers).

    ``values`` is a 2-D array indexed [row, col]. Quantized grids use an
    integer dtype so exact pixel comparison is meaningful.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 2 or values.size == 0:
            raise ValueError("image values must be a non-empty 2-D array")
        if not (np.issubdtype(values.dtype, np.integer)
                or np.issubdtype(values.dtype, np.floating)):
            raise ValueError(f"unsupported image dtype {values.dtype}")
        if np.issubdtype(values.dtype, np.floating) and not np.all(np.isfinite(values)):
            raise ValueError("image values must be finite")
        if np.any(values < 0):
            raise ValueError("image values must be non-negative")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def total(self) -> float:
        return float(self.values.sum())


def _raster(n: int) -> np.ndarray:
    """Sample the continuous ten-ellipse phantom at the n x n pixel centers."""
    # Pixel (i, j) center in [-1, 1]^2; row 0 is the top of the image.
    xs = -1.0 + (np.arange(n) + 0.5) * (2.0 / n)
    ys = 1.0 - (np.arange(n) + 0.5) * (2.0 / n)
    x, y = np.meshgrid(xs, ys)
    out = np.zeros((n, n))
    for value, cx, cy, a, b, phi_deg in _ELLIPSES:
        phi = math.radians(phi_deg)
        xr = (x - cx) * math.cos(phi) + (y - cy) * math.sin(phi)
        yr = -(x - cx) * math.sin(phi) + (y - cy) * math.cos(phi)
        out += value * ((xr / a) ** 2 + (yr / b) ** 2 <= 1.0)
    return out


def make_shepp_logan(n: int, mode: str = "binary", levels: int | None = None) -> ImageGrid:
    """Rasterize the ten-ellipse head phantom on an n x n grid.

    Parameters
    ----------
    n : side length in pixels (>= 2).
    mode : "binary" thresholds positive intensity to 1; "quantized" rescales
        the continuous phantom onto integer levels.
    levels : number of gray levels for quantized mode; must be a power of two
        (>= 2) so every value fits a whole number of bits.

    Positive intensities always quantize to at least 1, so the support of the
    quantized phantom matches the binary one at every level count.
    """
    if n < 2:
        raise ValueError(f"phantom side length must be >= 2, got {n}")
    raster = _raster(n)
    if mode == "binary":
        if levels is not None:
            raise ValueError("levels only applies to quantized mode")
        return ImageGrid((raster > 0.0).astype(np.int64))
    if mode == "quantized":
        if levels is None or levels < 2 or (levels & (levels - 1)) != 0:
            raise ValueError(f"levels must be a power of two >= 2, got {levels}")
        peak = raster.max()
        if peak <= 0.0:
            return ImageGrid(np.zeros((n, n), dtype=np.int64))
        scaled = np.ceil(raster * ((levels - 1) / peak))
        return ImageGrid(np.maximum(scaled, 0.0).astype(np.int64))
    raise ValueError(f"unknown phantom mode {mode!r}")


def make_random_image(n: int, bit_depth: int, seed: int) -> ImageGrid:
    """Seeded random integer image with values in [0, 2**bit_depth)."""
    if n < 1:
        raise ValueError(f"side length must be >= 1, got {n}")
    if bit_depth < 1:
        raise ValueError(f"bit depth must be >= 1, got {bit_depth}")
    rng = np.random.default_rng(seed)
    return ImageGrid(rng.integers(0, 2 ** bit_depth, size=(n, n), dtype=np.int64))


def _format_number(x) -> str:
    if float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def write_matrix_csv(values: np.ndarray, path) -> None:
    values = np.asarray(values)
    lines = [",".join(_format_number(v) for v in row) for row in values]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    rows = []
    integral = True
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        row = [float(tok) for tok in line.split(",")]
        integral = integral and all(v.is_integer() for v in row)
        rows.append(row)
    if not rows:
        raise ValueError(f"no data rows in {path}")
    values = np.array(rows)
    return values.astype(np.int64) if integral else values


def write_image_csv(image: ImageGrid, path) -> None:
    """CSV interchange format: one line per row, comma-separated numbers."""
    write_matrix_csv(image.values, path)


def read_image_csv(path) -> ImageGrid:
    return ImageGrid(read_matrix_csv(path))


def write_image_pgm(image: ImageGrid, path, bit_depth: int | None = None) -> None:
    """Plain (P2) PGM, for eyeballing. maxval = max(1, 2**bit_depth - 1).

    Without an explicit bit depth the maxval is taken from the data. Float
    images are rounded to the nearest integer.
    """
    values = np.rint(np.asarray(image.values, dtype=float)).astype(np.int64)
    if bit_depth is not None:
        maxval = max(1, 2 ** bit_depth - 1)
    else:
        maxval = max(1, int(values.max()))
    if values.max() > maxval:
        raise ValueError(f"pixel value {values.max()} exceeds PGM maxval {maxval}")
    lines = ["P2", f"{image.n_cols} {image.n_rows}", str(maxval)]
    lines += [" ".join(str(v) for v in row) for row in values]
    Path(path).write_text("\n".join(lines) + "\n")


def read_image_pgm(path) -> ImageGrid:
    tokens = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0]
        tokens.extend(line.split())
    if not tokens or tokens[0] != "P2":
        raise ValueError(f"{path} is not a plain (P2) PGM file")
    width, height, _maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    pixels = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
    if pixels.size != width * height:
        raise ValueError(f"PGM pixel count {pixels.size} != {width}x{height}")
    return ImageGrid(pixels.reshape(height, width))
