"""Classical minimizers for binary quadratic models.

Three solvers with one result type: exhaustive enumeration (exact, small
models), restarted simulated annealing (the workhorse), and steepest-descent
bit-flip refinement. All are deterministic for a fixed seed so that every
pipeline artifact is reproducible.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .qubo import QuboModel, _as_bits, qubo_energy

EXHAUSTIVE_CAP = 24


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Best assignment found plus bookkeeping for reproducibility reports."""

    best_assignment: np.ndarray
    best_energy: float
    occurrences: int
    samples_total: int
    solver_name: str
    seed: int
    wall_time: float

    def __post_init__(self):
        q = np.asarray(self.best_assignment, dtype=np.int8)
        q.setflags(write=False)
        object.__setattr__(self, "best_assignment", q)
        if self.occurrences > self.samples_total:
            raise ValueError(
                f"occurrences {self.occurrences} exceeds samples_total "
                f"{self.samples_total}")


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric inverse-temperature ramp shared by every restart chain.

    sweeps may be 0, in which case chains return their evaluated random
    initial states untouched (useful as a sampling baseline).
    """

    sweeps: int
    beta_start: float
    beta_end: float
    restarts: int
    seed: int = 0

    def __post_init__(self):
        if self.sweeps < 0:
            raise ValueError(f"sweeps must be >= 0, got {self.sweeps}")
        if not self.beta_start > 0.0:
            raise ValueError(f"beta_start must be positive, got {self.beta_start}")
        if self.beta_end < self.beta_start:
            raise ValueError(
                f"beta_end {self.beta_end} must be >= beta_start {self.beta_start}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")

    def betas(self) -> np.ndarray:
        return np.geomspace(self.beta_start, self.beta_end, self.sweeps)


def default_schedule(num_variables: int, seed: int = 0,
                     restarts: int = 32) -> AnnealSchedule:
    """Desk-scale default: 200 sweeps per variable, beta 0.1 -> 10, 32 chains."""
    return AnnealSchedule(sweeps=200 * num_variables, beta_start=0.1,
                          beta_end=10.0, restarts=restarts, seed=seed)


def local_fields(model: QuboModel, assignment) -> np.ndarray:
    """f_v = linear_v + sum_u Q_{uv} q_u; the flip delta is (1 - 2 q_v) f_v."""
    q = _as_bits(assignment, model.num_variables).astype(float)
    indptr, indices, weights = model.neighbor_arrays
    f = model.linear_vector.copy()
    for v in np.nonzero(q)[0]:
        lo, hi = indptr[v], indptr[v + 1]
        f[indices[lo:hi]] += weights[lo:hi]
    return f


def flip_delta(model: QuboModel, assignment, v: int) -> float:
    """Energy change from flipping bit v, computed from the local field."""
    q = _as_bits(assignment, model.num_variables)
    f = local_fields(model, q)
    return float((1 - 2 * q[v]) * f[v])


def solve_exhaustive(model: QuboModel,
                     max_variables: int = EXHAUSTIVE_CAP) -> SolveResult:
    """True global minimum by enumerating all 2^V assignments.

    Assignment bit v of enumeration counter k is (k >> v) & 1; ties are
    counted by exact energy equality and the lowest counter wins, so the
    result is fully deterministic.
    """
    V = model.num_variables
    if V > max_variables:
        raise ValueError(
            f"{V} variables exceeds the exhaustive cap of {max_variables}")
    t0 = time.perf_counter()
    M = model.symmetric_matrix()
    total = 1 << V
    chunk = 1 << 16
    shifts = np.arange(V, dtype=np.int64)
    best_energy = math.inf
    best_counter = 0
    occurrences = 0
    for start in range(0, total, chunk):
        ks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        B = ((ks[:, None] >> shifts) & 1).astype(float)
        E = np.einsum("ij,ij->i", B @ M, B)
        chunk_min = float(E.min())
        if chunk_min < best_energy:
            best_energy = chunk_min
            best_counter = int(ks[int(np.argmin(E))])
            occurrences = int(np.count_nonzero(E == chunk_min))
        elif chunk_min == best_energy:
            occurrences += int(np.count_nonzero(E == chunk_min))
    q = ((best_counter >> shifts) & 1).astype(np.int8)
    return SolveResult(
        best_assignment=q,
        best_energy=qubo_energy(model, q),
        occurrences=occurrences,
        samples_total=total,
        solver_name="exhaustive",
        seed=0,
        wall_time=time.perf_counter() - t0,
    )


@njit(cache=True)
def _anneal_chain(linear, indptr, indices, weights, betas, seed):
    """One Metropolis chain; returns (state, incrementally tracked energy).

    Local fields f carry the O(degree) flip deltas; the energy identity
    E = sum_v q_v (f_v + linear_v) / 2 initializes the running value.
    """
    np.random.seed(seed)
    V = linear.size
    q = np.empty(V, dtype=np.int8)
    for v in range(V):
        q[v] = 1 if np.random.random() < 0.5 else 0
    f = linear.copy()
    for v in range(V):
        if q[v] == 1:
            for t in range(indptr[v], indptr[v + 1]):
                f[indices[t]] += weights[t]
    energy = 0.0
    for v in range(V):
        if q[v] == 1:
            energy += 0.5 * (f[v] + linear[v])
    for sweep in range(betas.size):
        beta = betas[sweep]
        for v in range(V):
            sgn = 1.0 - 2.0 * q[v]
            delta = sgn * f[v]
            if delta <= 0.0 or np.random.random() < math.exp(-beta * delta):
                q[v] = 1 - q[v]
                energy += delta
                for t in range(indptr[v], indptr[v + 1]):
                    f[indices[t]] += sgn * weights[t]
    return q, energy


def anneal_chain(model: QuboModel, betas: np.ndarray,
                 seed: int) -> tuple[np.ndarray, float]:
    """Run a single annealing chain; exposed so the incremental energy can be
    checked against full re-evaluation."""
    indptr, indices, weights = model.neighbor_arrays
    q, energy = _anneal_chain(
        model.linear_vector, indptr, indices, weights,
        np.asarray(betas, dtype=float), seed)
    return q, float(energy)


def solve_anneal(model: QuboModel, schedule: AnnealSchedule) -> SolveResult:
    """Restarted single-bit-flip Metropolis annealing.

    Each restart runs an independent chain under the shared beta ramp with
    its own child seed; the reported energy of every chain is re-evaluated
    from scratch, the minimum wins (first attaining restart on ties), and
    occurrences counts the restarts reaching that minimum.
    """
    t0 = time.perf_counter()
    betas = schedule.betas()
    child_seeds = np.random.SeedSequence(schedule.seed).generate_state(
        schedule.restarts)
    best_q = None
    best_energy = math.inf
    occurrences = 0
    for r in range(schedule.restarts):
        q, _ = anneal_chain(model, betas, int(child_seeds[r]))
        energy = qubo_energy(model, q)
        if energy < best_energy:
            best_energy = energy
            best_q = q
            occurrences = 1
        elif energy == best_energy:
            occurrences += 1
    return SolveResult(
        best_assignment=best_q,
        best_energy=best_energy,
        occurrences=occurrences,
        samples_total=schedule.restarts,
        solver_name="anneal",
        seed=schedule.seed,
        wall_time=time.perf_counter() - t0,
    )


def solve_bitflip(model: QuboModel, start,
                  max_passes: int | None = None) -> SolveResult:
    """Steepest-descent refinement: repeatedly flip the bit with the most
    negative delta until no flip lowers the energy (1-flip local optimality)
    or max_passes flips have been made."""
    q = _as_bits(start, model.num_variables).copy()
    indptr, indices, weights = model.neighbor_arrays
    f = local_fields(model, q)
    flips = 0
    while max_passes is None or flips < max_passes:
        deltas = (1 - 2 * q) * f
        v = int(np.argmin(deltas))
        if deltas[v] >= 0.0:
            break
        sgn = 1 - 2 * q[v]
        q[v] = 1 - q[v]
        lo, hi = indptr[v], indptr[v + 1]
        f[indices[lo:hi]] += sgn * weights[lo:hi]
        flips += 1
    return SolveResult(
        best_assignment=q.astype(np.int8),
        best_energy=qubo_energy(model, q),
        occurrences=1,
        samples_total=1,
        solver_name="bitflip",
        seed=0,
        wall_time=0.0,
    )


def save_result(result: SolveResult, path) -> None:
    """Solution JSON; wall time is deliberately excluded so identical runs
    produce identical files."""
    data = {
        "solver": result.solver_name,
        "seed": result.seed,
        "best_energy": result.best_energy,
        "occurrences": result.occurrences,
        "samples_total": result.samples_total,
        "assignment": "".join(str(int(b)) for b in result.best_assignment),
    }
    Path(path).write_text(json.dumps(data) + "\n")


def load_result(path) -> SolveResult:
    data = json.loads(Path(path).read_text())
    return SolveResult(
        best_assignment=np.array([int(c) for c in data["assignment"]],
                                 dtype=np.int8),
        best_energy=float(data["best_energy"]),
        occurrences=int(data["occurrences"]),
        samples_total=int(data["samples_total"]),
        solver_name=data["solver"],
        seed=int(data["seed"]),
        wall_time=0.0,
    )
