"""CT reconstruction from sinograms via binary quadratic energy minimization.

An image with integer pixel values is bit-encoded into binary variables;
the squared mismatch between its forward projection and a measured sinogram
becomes a sparse quadratic polynomial whose minimum energy equals the
negated sum of squared measurements exactly when a perfect reconstruction
exists. Classical solvers (exhaustive, simulated annealing, bit-flip
descent) minimize it; JSON exports bridge to external annealing hardware.
"""

from .phantom import ImageGrid, make_random_image, make_shepp_logan
from .projector import (
    ProjectionGeometry,
    Sinogram,
    SparseProjector,
    angles_from_count,
    angles_from_step,
    build_projector,
    forward_project,
    wide_bin_count,
)
from .qubo import (
    BitEncoding,
    QuboModel,
    build_qubo,
    decode,
    encode,
    load_qubo,
    qubo_energies,
    qubo_energy,
    save_qubo,
)
from .ising import (
    IsingModel,
    bits_from_spins,
    ising_energy,
    load_ising,
    save_ising,
    spins_from_bits,
    to_ising,
    to_qubo,
)
from .solver import (
    AnnealSchedule,
    SolveResult,
    default_schedule,
    flip_delta,
    load_result,
    local_fields,
    save_result,
    solve_anneal,
    solve_bitflip,
    solve_exhaustive,
)
from .recon import (
    ReconReport,
    compare,
    difference_image,
    energy_report,
    reconstruct,
    save_report,
)
from .preprocess import (
    RawProjectionSet,
    beer_lambert_correct,
    frames_to_sinogram,
    load_raw_set,
    simulate_intensity_frames,
    subtract_air_background,
)

__version__ = "0.1.0"
