"""Spin-variable form of the binary quadratic model.

Substituting q = (sigma + 1)/2 maps a 0/1 polynomial onto a +-1 polynomial
with fields h, couplings J, and a conversion constant chosen so that

    qubo_energy(q) == ising_energy(sigma(q)) + conversion_offset

holds for every assignment. The constant is stored explicitly because the
two models otherwise report different numbers for the same state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .qubo import COEFF_FLOOR, QuboModel


@dataclass(frozen=True, eq=False)
class IsingModel:
    """energy(sigma) = sum_v h_v sigma_v + sum_{u<v} J_uv sigma_u sigma_v."""

    num_variables: int
    field: dict
    coupling: dict
    conversion_offset: float = 0.0

    def __post_init__(self):
        if self.num_variables < 1:
            raise ValueError("model needs at least one variable")
        V = self.num_variables
        for v in self.field:
            if not 0 <= v < V:
                raise ValueError(f"field index {v} out of range for V={V}")
        for u, v in self.coupling:
            if not (0 <= u < v < V):
                raise ValueError(
                    f"coupling key ({u},{v}) must satisfy 0 <= u < v < {V}")

    @cached_property
    def field_vector(self) -> np.ndarray:
        vec = np.zeros(self.num_variables)
        for v, h in self.field.items():
            vec[v] = h
        vec.setflags(write=False)
        return vec

    @cached_property
    def pair_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.coupling:
            z = np.zeros(0, dtype=np.int64)
            return z, z.copy(), np.zeros(0)
        items = sorted(self.coupling.items())
        uu = np.array([k[0] for k, _ in items], dtype=np.int64)
        vv = np.array([k[1] for k, _ in items], dtype=np.int64)
        cc = np.array([c for _, c in items])
        for a in (uu, vv, cc):
            a.setflags(write=False)
        return uu, vv, cc


def to_ising(model: QuboModel) -> IsingModel:
    """Closed-form substitution q = (sigma + 1)/2.

    J_uv = Q_uv / 4
    h_v  = Q_vv / 2 + sum_{u != v} Q_uv / 4
    conversion_offset = sum_v Q_vv / 2 + sum_{u<v} Q_uv / 4
    """
    V = model.num_variables
    h = model.linear_vector / 2.0
    uu, vv, cc = model.pair_arrays
    np.add.at(h, uu, cc / 4.0)
    np.add.at(h, vv, cc / 4.0)
    conversion = float(np.sum(model.linear_vector) / 2.0 + np.sum(cc) / 4.0)
    field = {int(v): float(x) for v, x in enumerate(h)
             if abs(x) >= COEFF_FLOOR}
    coupling = {(int(u), int(v)): float(c / 4.0)
                for u, v, c in zip(uu, vv, cc) if abs(c) / 4.0 >= COEFF_FLOOR}
    return IsingModel(num_variables=V, field=field, coupling=coupling,
                      conversion_offset=conversion)


def to_qubo(model: IsingModel, offset: float = 0.0) -> QuboModel:
    """Analytic inverse of :func:`to_ising` via sigma = 2q - 1.

    The spin model's conversion_offset must be the one its own coefficients
    induce (true for any model produced by to_ising); otherwise the 0/1
    polynomial would need a constant term that QuboModel does not represent.
    ``offset`` restores the squared-measurement constant, which the spin
    form does not carry.
    """
    V = model.num_variables
    uu, vv, cc = model.pair_arrays
    lin = 2.0 * model.field_vector
    np.add.at(lin, uu, -2.0 * cc)
    np.add.at(lin, vv, -2.0 * cc)
    residual = (model.conversion_offset
                - float(np.sum(model.field_vector)) + float(np.sum(cc)))
    scale = max(1.0, abs(model.conversion_offset))
    if abs(residual) > 1e-9 * scale:
        raise ValueError(
            f"conversion_offset is inconsistent with the coefficients "
            f"(residual constant {residual}); no offset-free 0/1 form exists")
    linear = {int(v): float(x) for v, x in enumerate(lin)
              if abs(x) >= COEFF_FLOOR}
    quadratic = {(int(u), int(v)): float(4.0 * c)
                 for u, v, c in zip(uu, vv, cc) if abs(4.0 * c) >= COEFF_FLOOR}
    return QuboModel(num_variables=V, linear=linear, quadratic=quadratic,
                     offset=offset)


def ising_energy(model: IsingModel, spins) -> float:
    s = np.asarray(spins)
    if s.ndim != 1 or s.size != model.num_variables:
        raise ValueError(
            f"spin vector length {s.size} != {model.num_variables} variables")
    s = s.astype(float)
    if np.any(np.abs(s) != 1.0):
        raise ValueError("spins must be -1 or +1")
    uu, vv, cc = model.pair_arrays
    return float(model.field_vector @ s + cc @ (s[uu] * s[vv]))


def spins_from_bits(assignment) -> np.ndarray:
    """0/1 vector -> -1/+1 vector (sigma = 2q - 1)."""
    q = np.asarray(assignment, dtype=np.int64)
    return 2 * q - 1


def bits_from_spins(spins) -> np.ndarray:
    """-1/+1 vector -> 0/1 vector (q = (sigma + 1)/2)."""
    s = np.asarray(spins, dtype=np.int64)
    return (s + 1) // 2


def save_ising(model: IsingModel, path) -> None:
    data = {
        "num_variables": model.num_variables,
        "conversion_offset": model.conversion_offset,
        "field": [[v, model.field[v]] for v in sorted(model.field)],
        "coupling": [[u, v, model.coupling[(u, v)]]
                     for u, v in sorted(model.coupling)],
    }
    Path(path).write_text(json.dumps(data) + "\n")


def load_ising(path) -> IsingModel:
    data = json.loads(Path(path).read_text())
    return IsingModel(
        num_variables=int(data["num_variables"]),
        field={int(v): float(h) for v, h in data["field"]},
        coupling={(int(u), int(v)): float(c) for u, v, c in data["coupling"]},
        conversion_offset=float(data["conversion_offset"]),
    )
