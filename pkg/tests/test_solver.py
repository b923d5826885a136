import numpy as np
import pytest

from tomoqubo.phantom import ImageGrid
from tomoqubo.projector import (ProjectionGeometry, build_projector,
                                forward_project)
from tomoqubo.qubo import QuboModel, build_qubo, qubo_energies, qubo_energy
from tomoqubo.solver import (AnnealSchedule, SolveResult, anneal_chain,
                             default_schedule, flip_delta, load_result,
                             local_fields, save_result, solve_anneal,
                             solve_bitflip, solve_exhaustive)

from conftest import all_assignments, make_instance


@pytest.fixture(scope="module")
def golden_model():
    image = ImageGrid(np.array([[0, 1], [2, 3]]))
    geo = ProjectionGeometry(n=2, angles=np.array([0.0, 90.0]))
    A = build_projector(geo)
    return build_qubo(A, forward_project(A, image), bits_per_pixel=2)


def random_qubo(rng, num_variables, density=0.5):
    linear = {v: float(rng.normal()) for v in range(num_variables)
              if rng.random() < 0.8}
    quadratic = {(u, v): float(rng.normal())
                 for u in range(num_variables)
                 for v in range(u + 1, num_variables)
                 if rng.random() < density}
    return QuboModel(num_variables=num_variables, linear=linear,
                     quadratic=quadratic)


class TestExhaustive:
    def test_golden_unique_optimum(self, golden_model):
        res = solve_exhaustive(golden_model)
        assert res.best_energy == -46.0
        assert res.occurrences == 1
        assert res.samples_total == 256
        assert res.best_assignment.tolist() == [0, 0, 1, 0, 0, 1, 1, 1]
        assert res.solver_name == "exhaustive"

    def test_zero_model_all_states_optimal(self):
        model = QuboModel(num_variables=5, linear={}, quadratic={})
        res = solve_exhaustive(model)
        assert res.best_energy == 0.0
        assert res.occurrences == 32
        assert res.samples_total == 32

    def test_cap_error_names_the_cap(self):
        model = QuboModel(num_variables=30, linear={}, quadratic={})
        with pytest.raises(ValueError, match="24"):
            solve_exhaustive(model)
        res = solve_exhaustive(
            QuboModel(num_variables=5, linear={}, quadratic={}),
            max_variables=5)
        assert res.samples_total == 32

    def test_matches_brute_force_on_random_models(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            model = random_qubo(rng, 8)
            res = solve_exhaustive(model)
            energies = qubo_energies(model, all_assignments(8))
            assert abs(res.best_energy - energies.min()) < 1e-9
            assert res.occurrences == np.count_nonzero(
                energies == energies.min())

    def test_binary_2x2_instances_reach_negative_offset_when_unique(self):
        # With axis-aligned projections the model encodes row/column sums;
        # when only one binary image satisfies them, the optimum is -offset.
        for seed in range(20):
            image, _, projector, target, model, enc = make_instance(
                n=2, bits=1, n_angles=2, seed=seed, wide=False,
                uniform_angles=True)
            res = solve_exhaustive(model)
            states = all_assignments(4)
            zero_resid = np.count_nonzero(
                np.abs(qubo_energies(model, states) + model.offset) < 1e-9)
            if zero_resid == 1:
                assert abs(res.best_energy + model.offset) < 1e-9
                assert res.occurrences == 1


class TestAnnealSchedule:
    def test_validation(self):
        with pytest.raises(ValueError):
            AnnealSchedule(sweeps=-1, beta_start=0.1, beta_end=1.0, restarts=1)
        with pytest.raises(ValueError):
            AnnealSchedule(sweeps=1, beta_start=0.0, beta_end=1.0, restarts=1)
        with pytest.raises(ValueError):
            AnnealSchedule(sweeps=1, beta_start=2.0, beta_end=1.0, restarts=1)
        with pytest.raises(ValueError):
            AnnealSchedule(sweeps=1, beta_start=0.1, beta_end=1.0, restarts=0)

    def test_betas_monotone_nondecreasing(self):
        sched = AnnealSchedule(sweeps=50, beta_start=0.2, beta_end=8.0,
                               restarts=1)
        betas = sched.betas()
        assert betas.size == 50
        assert np.all(np.diff(betas) >= 0.0)
        assert betas[0] == pytest.approx(0.2)
        assert betas[-1] == pytest.approx(8.0)

    def test_default_schedule_shape(self):
        sched = default_schedule(100, seed=4)
        assert sched.sweeps == 20000
        assert sched.restarts == 32
        assert sched.seed == 4


class TestAnneal:
    def test_golden_reaches_optimum(self, golden_model, warm_kernel):
        sched = AnnealSchedule(sweeps=1000, beta_start=0.1, beta_end=10.0,
                               restarts=100, seed=1)
        res = solve_anneal(golden_model, sched)
        assert res.best_energy == -46.0
        assert res.best_assignment.tolist() == [0, 0, 1, 0, 0, 1, 1, 1]
        assert res.samples_total == 100
        assert 1 <= res.occurrences <= 100

    def test_deterministic_for_fixed_seed(self, golden_model, warm_kernel):
        sched = AnnealSchedule(sweeps=200, beta_start=0.1, beta_end=5.0,
                               restarts=7, seed=123)
        a = solve_anneal(golden_model, sched)
        b = solve_anneal(golden_model, sched)
        assert a.best_energy == b.best_energy
        assert a.occurrences == b.occurrences
        assert np.array_equal(a.best_assignment, b.best_assignment)

    def test_zero_sweeps_evaluates_random_states(self, golden_model,
                                                 warm_kernel):
        sched = AnnealSchedule(sweeps=0, beta_start=1.0, beta_end=1.0,
                               restarts=16, seed=5)
        res = solve_anneal(golden_model, sched)
        assert res.best_energy >= -46.0
        assert qubo_energy(golden_model, res.best_assignment) == res.best_energy

    def test_incremental_energy_matches_reevaluation(self, warm_kernel):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            model = random_qubo(rng, 20)
            betas = np.geomspace(0.1, 4.0, 150)
            q, incremental = anneal_chain(model, betas, seed=seed + 1)
            assert abs(incremental - qubo_energy(model, q)) < 1e-9

    def test_dominates_exhaustive_minimum(self, warm_kernel):
        rng = np.random.default_rng(3)
        for _ in range(8):
            model = random_qubo(rng, 10)
            exact = solve_exhaustive(model)
            sched = AnnealSchedule(sweeps=60, beta_start=0.1, beta_end=3.0,
                                   restarts=4, seed=11)
            res = solve_anneal(model, sched)
            assert res.best_energy >= exact.best_energy - 1e-9

    def test_energy_floor_on_built_models(self, warm_kernel):
        _, _, _, _, model, _ = make_instance(n=3, bits=1, n_angles=3, seed=6)
        sched = AnnealSchedule(sweeps=400, beta_start=0.1, beta_end=10.0,
                               restarts=8, seed=2)
        res = solve_anneal(model, sched)
        assert res.best_energy >= -model.offset - 1e-9 * max(1.0, model.offset)


class TestLocalFields:
    def test_flip_delta_matches_energy_difference(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            model = random_qubo(rng, 12)
            for _ in range(100):
                q = rng.integers(0, 2, size=12)
                v = int(rng.integers(0, 12))
                flipped = q.copy()
                flipped[v] = 1 - flipped[v]
                expected = qubo_energy(model, flipped) - qubo_energy(model, q)
                assert abs(flip_delta(model, q, v) - expected) < 1e-9

    def test_local_fields_definition(self):
        model = QuboModel(num_variables=3, linear={0: 1.0, 2: -2.0},
                          quadratic={(0, 1): 4.0, (1, 2): -3.0})
        f = local_fields(model, np.array([1, 0, 1]))
        assert f.tolist() == [1.0, 1.0, -2.0]


class TestBitflip:
    def test_optimum_is_fixed_point(self, golden_model):
        start = np.array([0, 0, 1, 0, 0, 1, 1, 1])
        res = solve_bitflip(golden_model, start)
        assert res.best_energy == -46.0
        assert np.array_equal(res.best_assignment, start)

    def test_result_is_one_flip_locally_optimal(self):
        rng = np.random.default_rng(23)
        for _ in range(5):
            model = random_qubo(rng, 14)
            res = solve_bitflip(model, rng.integers(0, 2, size=14))
            base = res.best_energy
            for v in range(14):
                flipped = res.best_assignment.copy()
                flipped[v] = 1 - flipped[v]
                assert qubo_energy(model, flipped) >= base - 1e-9

    def test_max_passes_bounds_flip_count(self):
        rng = np.random.default_rng(29)
        model = random_qubo(rng, 16)
        start = rng.integers(0, 2, size=16)
        res = solve_bitflip(model, start, max_passes=1)
        assert np.count_nonzero(res.best_assignment != start) <= 1

    def test_multistart_reaches_global_minimum_usually(self):
        # Regression guard, not a theorem: over random models, 50 restarts
        # of steepest descent should land on the true optimum most of the
        # time.
        rng = np.random.default_rng(31)
        hits = 0
        models = 10
        for _ in range(models):
            model = random_qubo(rng, 12)
            exact = solve_exhaustive(model).best_energy
            best = min(
                solve_bitflip(model, rng.integers(0, 2, size=12)).best_energy
                for _ in range(50))
            hits += bool(abs(best - exact) < 1e-9)
        assert hits >= 0.8 * models

    def test_rejects_wrong_start_length(self, golden_model):
        with pytest.raises(ValueError):
            solve_bitflip(golden_model, np.zeros(3, dtype=int))


class TestSolveResult:
    def test_occurrence_bound_validated(self):
        with pytest.raises(ValueError):
            SolveResult(best_assignment=np.array([0]), best_energy=0.0,
                        occurrences=3, samples_total=2, solver_name="x",
                        seed=0, wall_time=0.0)

    def test_json_round_trip_excludes_wall_time(self, golden_model, tmp_path):
        res = solve_exhaustive(golden_model)
        path = tmp_path / "solution.json"
        save_result(res, path)
        assert "wall_time" not in path.read_text()
        back = load_result(path)
        assert np.array_equal(back.best_assignment, res.best_assignment)
        assert back.best_energy == res.best_energy
        assert back.occurrences == res.occurrences
        assert back.samples_total == res.samples_total
        assert back.solver_name == res.solver_name
        assert back.seed == res.seed
