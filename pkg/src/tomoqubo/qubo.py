"""Binary quadratic model assembly from projection data.

The unknown image is bit-encoded (pixel value = sum of powers of two times
binary variables) and the squared residual between its forward projection
and the measured sinogram is expanded into a quadratic polynomial over the
bits. Minimizing that polynomial is equivalent to minimizing the residual;
the constant term (sum of squared measurements) is carried separately as
``offset`` so the polynomial's minimum equals ``-offset`` exactly when a
zero-residual reconstruction exists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .phantom import ImageGrid
from .projector import SparseProjector, Sinogram

# Accumulated coefficients below this magnitude are treated as exact zeros.
COEFF_FLOOR = 1e-12


@dataclass(frozen=True)
class BitEncoding:
    """Fixed-point binary encoding of an n x n non-negative integer image.

    Pixel (i, j) is stored little-endian across ``bits_per_pixel`` binary
    variables; variable ``(i*n + j)*bits_per_pixel + k`` carries weight 2^k.
    """

    n: int
    bits_per_pixel: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"image side must be >= 1, got {self.n}")
        if self.bits_per_pixel < 1:
            raise ValueError(
                f"bits_per_pixel must be >= 1, got {self.bits_per_pixel}")

    @property
    def num_variables(self) -> int:
        return self.n * self.n * self.bits_per_pixel

    @property
    def max_pixel_value(self) -> int:
        return (1 << self.bits_per_pixel) - 1

    def variable_index(self, i: int, j: int, k: int) -> int:
        return (i * self.n + j) * self.bits_per_pixel + k


def encode(encoding: BitEncoding, image: ImageGrid) -> np.ndarray:
    """Image -> 0/1 assignment vector in variable order."""
    vals = np.asarray(image.values)
    if vals.shape != (encoding.n, encoding.n):
        raise ValueError(
            f"image is {vals.shape}, encoding expects ({encoding.n}, {encoding.n})")
    ints = np.rint(vals).astype(np.int64)
    if np.any(np.abs(vals - ints) > 1e-9):
        raise ValueError("image has non-integer values; cannot bit-encode")
    if np.any(ints < 0) or np.any(ints > encoding.max_pixel_value):
        raise ValueError(
            f"pixel values must lie in [0, {encoding.max_pixel_value}] "
            f"for {encoding.bits_per_pixel}-bit encoding")
    shifts = np.arange(encoding.bits_per_pixel)
    bits = (ints.ravel()[:, None] >> shifts) & 1
    return bits.ravel().astype(np.int8)


def decode(encoding: BitEncoding, assignment) -> ImageGrid:
    """0/1 assignment vector -> image, inverse of :func:`encode`."""
    q = _as_bits(assignment, encoding.num_variables)
    weights = 1 << np.arange(encoding.bits_per_pixel, dtype=np.int64)
    pixels = q.reshape(-1, encoding.bits_per_pixel) @ weights
    return ImageGrid(values=pixels.reshape(encoding.n, encoding.n))


def _as_bits(assignment, expected: int) -> np.ndarray:
    q = np.asarray(assignment)
    if q.ndim != 1 or q.size != expected:
        raise ValueError(f"assignment length {q.size} != {expected} variables")
    q = q.astype(np.int64)
    if np.any((q != 0) & (q != 1)):
        raise ValueError("assignment entries must be 0 or 1")
    return q


@dataclass(frozen=True, eq=False)
class QuboModel:
    """Sparse upper-triangular quadratic polynomial over binary variables.

    energy(q) = sum_v linear[v] q_v + sum_{u<v} quadratic[(u,v)] q_u q_v.
    ``offset`` is the constant completing the underlying sum of squares;
    it is not part of energy(q) but energy(q) + offset >= 0 always holds
    for models built from projection data.
    """

    num_variables: int
    linear: dict
    quadratic: dict
    offset: float = 0.0

    def __post_init__(self):
        if self.num_variables < 1:
            raise ValueError("model needs at least one variable")
        V = self.num_variables
        for v in self.linear:
            if not 0 <= v < V:
                raise ValueError(f"linear index {v} out of range for V={V}")
        for u, v in self.quadratic:
            if not (0 <= u < v < V):
                raise ValueError(
                    f"quadratic key ({u},{v}) must satisfy 0 <= u < v < {V}")
        if self.offset < 0.0:
            raise ValueError(f"offset must be non-negative, got {self.offset}")

    @cached_property
    def linear_vector(self) -> np.ndarray:
        vec = np.zeros(self.num_variables)
        for v, c in self.linear.items():
            vec[v] = c
        vec.setflags(write=False)
        return vec

    @cached_property
    def pair_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(u, v, coeff) arrays for the quadratic terms, u < v."""
        if not self.quadratic:
            z = np.zeros(0, dtype=np.int64)
            return z, z.copy(), np.zeros(0)
        items = sorted(self.quadratic.items())
        uu = np.array([k[0] for k, _ in items], dtype=np.int64)
        vv = np.array([k[1] for k, _ in items], dtype=np.int64)
        cc = np.array([c for _, c in items])
        for a in (uu, vv, cc):
            a.setflags(write=False)
        return uu, vv, cc

    @cached_property
    def neighbor_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Symmetrized adjacency (indptr, indices, coeffs), CSR by variable.

        Row v lists every u != v with a quadratic term, coefficient
        quadratic[(min,max)]; this is the structure single-bit-flip solvers
        need for O(degree) energy deltas.
        """
        V = self.num_variables
        uu, vv, cc = self.pair_arrays
        src = np.concatenate([uu, vv])
        dst = np.concatenate([vv, uu])
        val = np.concatenate([cc, cc])
        order = np.lexsort((dst, src))
        src, dst, val = src[order], dst[order], val[order]
        indptr = np.zeros(V + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        indptr = np.cumsum(indptr)
        for a in (indptr, dst, val):
            a.setflags(write=False)
        return indptr, dst, val

    def symmetric_matrix(self) -> np.ndarray:
        """Dense symmetric form: linear on the diagonal, halved couplings off
        it; q^T M q equals energy(q) for binary q. Small models only."""
        V = self.num_variables
        m = np.diag(self.linear_vector).astype(float)
        uu, vv, cc = self.pair_arrays
        m[uu, vv] = cc / 2.0
        m[vv, uu] = cc / 2.0
        return m


def build_qubo(projector: SparseProjector, target: Sinogram,
               bits_per_pixel: int, row_mask=None) -> QuboModel:
    """Expand ||A x(q) - P||^2 into a QuboModel.

    Each operator row r with pixel weights c and target value P_r contributes,
    through the per-variable weights w_v = c_pixel * 2^k and the reduction
    q^2 = q for binary q:

        linear[v]          += w_v^2 - 2 P_r w_v
        quadratic[(u, v)]  += 2 w_u w_v          (u < v in the row)
        offset             += P_r^2

    row_mask, if given, is a boolean vector over operator rows; False rows are
    excluded (used to delete corrupted detector readings and their terms).
    """
    geo = projector.geometry
    if target.geometry.n_angles != geo.n_angles or target.geometry.n_bins != geo.n_bins:
        raise ValueError("target sinogram does not match projector geometry")
    if bits_per_pixel < 1:
        raise ValueError(f"bits_per_pixel must be >= 1, got {bits_per_pixel}")
    if row_mask is not None:
        row_mask = np.asarray(row_mask, dtype=bool)
        if row_mask.shape != (projector.n_rows,):
            raise ValueError(
                f"row_mask length {row_mask.size} != {projector.n_rows} rows")

    encoding = BitEncoding(n=geo.n, bits_per_pixel=bits_per_pixel)
    V = encoding.num_variables
    powers = 2.0 ** np.arange(bits_per_pixel)

    linear_vec = np.zeros(V)
    pair_u: list[np.ndarray] = []
    pair_v: list[np.ndarray] = []
    pair_c: list[np.ndarray] = []
    offset = 0.0
    P = target.values.ravel()

    for r in range(projector.n_rows):
        if row_mask is not None and not row_mask[r]:
            continue
        lo, hi = projector.indptr[r], projector.indptr[r + 1]
        p_r = float(P[r])
        offset += p_r * p_r
        if hi == lo:
            continue
        pix = projector.indices[lo:hi]
        # Row variables in ascending order with their projection weights.
        vids = (pix[:, None] * bits_per_pixel
                + np.arange(bits_per_pixel)).ravel()
        w = (projector.weights[lo:hi][:, None] * powers).ravel()
        linear_vec[vids] += w * w - 2.0 * p_r * w
        if vids.size > 1:
            iu, ju = np.triu_indices(vids.size, k=1)
            pair_u.append(vids[iu])
            pair_v.append(vids[ju])
            pair_c.append(2.0 * w[iu] * w[ju])

    quadratic: dict = {}
    if pair_u:
        uu = np.concatenate(pair_u)
        vv = np.concatenate(pair_v)
        cc = np.concatenate(pair_c)
        key = uu * np.int64(V) + vv
        uniq, inverse = np.unique(key, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inverse, cc)
        keep = np.abs(merged) >= COEFF_FLOOR
        quadratic = {(int(k // V), int(k % V)): float(c)
                     for k, c in zip(uniq[keep], merged[keep])}
    linear = {int(v): float(c) for v, c in enumerate(linear_vec)
              if abs(c) >= COEFF_FLOOR}
    return QuboModel(num_variables=V, linear=linear,
                     quadratic=quadratic, offset=float(offset))


def qubo_energy(model: QuboModel, assignment) -> float:
    """Polynomial value at a 0/1 assignment, constant offset excluded."""
    q = _as_bits(assignment, model.num_variables).astype(float)
    uu, vv, cc = model.pair_arrays
    return float(model.linear_vector @ q + cc @ (q[uu] * q[vv]))


def qubo_energies(model: QuboModel, assignments: np.ndarray) -> np.ndarray:
    """Energies for a (n_states, V) 0/1 matrix in one vectorized pass."""
    B = np.asarray(assignments, dtype=float)
    if B.ndim != 2 or B.shape[1] != model.num_variables:
        raise ValueError(
            f"assignment matrix must be (n, {model.num_variables}), got {B.shape}")
    uu, vv, cc = model.pair_arrays
    return B @ model.linear_vector + (B[:, uu] * B[:, vv]) @ cc


def save_qubo(model: QuboModel, path) -> None:
    """JSON hand-off format consumed by external annealer toolchains."""
    data = {
        "num_variables": model.num_variables,
        "offset": model.offset,
        "linear": [[v, model.linear[v]] for v in sorted(model.linear)],
        "quadratic": [[u, v, model.quadratic[(u, v)]]
                      for u, v in sorted(model.quadratic)],
    }
    Path(path).write_text(json.dumps(data) + "\n")


def load_qubo(path) -> QuboModel:
    data = json.loads(Path(path).read_text())
    return QuboModel(
        num_variables=int(data["num_variables"]),
        linear={int(v): float(c) for v, c in data["linear"]},
        quadratic={(int(u), int(v)): float(c) for u, v, c in data["quadratic"]},
        offset=float(data["offset"]),
    )
