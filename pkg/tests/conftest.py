"""Shared test utilities.

The central oracle here, residual_energy, recomputes model energies from
first principles (decode -> forward project -> sum of squared residuals)
without touching the coefficient expansion, so expansion bugs cannot hide
behind symmetric evaluation bugs.
"""

import numpy as np
import pytest

from tomoqubo.phantom import ImageGrid
from tomoqubo.projector import (ProjectionGeometry, Sinogram, build_projector,
                                forward_project, wide_bin_count)
from tomoqubo.qubo import BitEncoding, build_qubo, decode


def residual_energy(projector, target, encoding, assignment, row_mask=None):
    """Independent energy oracle: ||A x(q) - P||^2 - sum(P^2), optionally
    restricted to unmasked operator rows."""
    image = decode(encoding, assignment)
    derived = forward_project(projector, image)
    resid = (derived.values - target.values).ravel()
    squared_target = (target.values ** 2).ravel()
    if row_mask is not None:
        keep = np.asarray(row_mask, dtype=bool)
        resid = resid[keep]
        squared_target = squared_target[keep]
    return float(np.sum(resid ** 2) - np.sum(squared_target))


def residual_energies(projector, target, encoding, states):
    """Vectorized residual oracle over a (n_states, V) assignment matrix."""
    states = np.asarray(states, dtype=np.int64)
    powers = 1 << np.arange(encoding.bits_per_pixel, dtype=np.int64)
    images = states.reshape(states.shape[0], -1,
                            encoding.bits_per_pixel) @ powers
    dense = projector.as_dense()
    projected = images @ dense.T
    resid = projected - target.values.ravel()
    return np.sum(resid ** 2, axis=1) - float(np.sum(target.values ** 2))


def all_assignments(num_variables):
    """(2^V, V) matrix of every 0/1 assignment; bit v of row k is (k>>v)&1."""
    ks = np.arange(1 << num_variables, dtype=np.int64)
    return ((ks[:, None] >> np.arange(num_variables, dtype=np.int64)) & 1)


def random_angles(rng, count):
    """Strictly increasing angle set in [0, 180) with a safe minimum gap."""
    raw = np.sort(rng.uniform(0.0, 179.0, size=count))
    return raw + np.arange(count) * 1e-3


def make_instance(n, bits, n_angles, seed, wide=True, uniform_angles=False):
    """Random image + geometry + operator + sinogram + model + encoding."""
    rng = np.random.default_rng(seed)
    image = ImageGrid(rng.integers(0, 1 << bits, size=(n, n), dtype=np.int64))
    if uniform_angles:
        angles = np.arange(n_angles) * (180.0 / n_angles)
    else:
        angles = random_angles(rng, n_angles)
    geometry = ProjectionGeometry(
        n=n, angles=angles, n_bins=wide_bin_count(n) if wide else None)
    projector = build_projector(geometry)
    target = forward_project(projector, image)
    model = build_qubo(projector, target, bits_per_pixel=bits)
    encoding = BitEncoding(n=n, bits_per_pixel=bits)
    return image, geometry, projector, target, model, encoding


@pytest.fixture(scope="session")
def warm_kernel():
    """Compile (or load the cached) annealing kernel outside timed regions."""
    from tomoqubo.solver import AnnealSchedule, solve_anneal
    from tomoqubo.qubo import QuboModel
    tiny = QuboModel(num_variables=2, linear={0: 1.0}, quadratic={(0, 1): -2.0})
    solve_anneal(tiny, AnnealSchedule(sweeps=5, beta_start=0.5, beta_end=1.0,
                                      restarts=1, seed=0))
    return True


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" in rep.nodeid and (rep.when == "call"
                                                    or outcome == "error"):
                name = rep.nodeid.split("::")[-1]
                rows.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in sorted(rows):
            terminalreporter.write_line(f"{status}  {name}")
