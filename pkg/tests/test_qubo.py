import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tomoqubo.phantom import ImageGrid
from tomoqubo.projector import (ProjectionGeometry, Sinogram, build_projector,
                                forward_project)
from tomoqubo.qubo import (BitEncoding, QuboModel, build_qubo, decode, encode,
                           load_qubo, qubo_energies, qubo_energy, save_qubo)

from conftest import (all_assignments, make_instance, residual_energies,
                      residual_energy)

# Hand-derived expansion of the 2x2 sample (0,1;2,3) with axis-aligned
# projections and 2 bits per pixel. Kept frozen: any change to the geometry
# or expansion conventions must surface here.
GOLDEN_LINEAR = {0: -4.0, 1: -4.0, 2: -8.0, 3: -12.0,
                 4: -12.0, 5: -20.0, 6: -16.0, 7: -28.0}
GOLDEN_QUADRATIC = {
    (0, 1): 8.0, (0, 2): 2.0, (0, 3): 4.0, (0, 4): 2.0, (0, 5): 4.0,
    (1, 2): 4.0, (1, 3): 8.0, (1, 4): 4.0, (1, 5): 8.0,
    (2, 3): 8.0, (2, 6): 2.0, (2, 7): 4.0,
    (3, 6): 4.0, (3, 7): 8.0,
    (4, 5): 8.0, (4, 6): 2.0, (4, 7): 4.0,
    (5, 6): 4.0, (5, 7): 8.0,
    (6, 7): 8.0,
}
GOLDEN_OFFSET = 46.0
GOLDEN_GROUND = np.array([0, 0, 1, 0, 0, 1, 1, 1], dtype=np.int8)
GOLDEN_ENERGY = -46.0


@pytest.fixture(scope="module")
def golden():
    image = ImageGrid(np.array([[0, 1], [2, 3]]))
    geometry = ProjectionGeometry(n=2, angles=np.array([0.0, 90.0]))
    projector = build_projector(geometry)
    target = forward_project(projector, image)
    model = build_qubo(projector, target, bits_per_pixel=2)
    return image, projector, target, model


class TestGoldenInstance:
    def test_coefficients_exact(self, golden):
        _, _, _, model = golden
        assert model.num_variables == 8
        assert model.linear == GOLDEN_LINEAR
        assert model.quadratic == GOLDEN_QUADRATIC
        assert model.offset == GOLDEN_OFFSET

    def test_absent_pairs_are_not_stored(self, golden):
        # Variables of pixels sharing no projection strip never couple.
        _, _, _, model = golden
        assert (1, 6) not in model.quadratic
        assert (0, 6) not in model.quadratic
        assert (0, 7) not in model.quadratic

    def test_ground_assignment_energy(self, golden):
        _, _, _, model = golden
        assert qubo_energy(model, GOLDEN_GROUND) == GOLDEN_ENERGY

    def test_zero_assignment_energy(self, golden):
        _, _, _, model = golden
        assert qubo_energy(model, np.zeros(8, dtype=int)) == 0.0

    def test_ground_decodes_to_sample(self, golden):
        image, _, _, _ = golden
        enc = BitEncoding(n=2, bits_per_pixel=2)
        assert np.array_equal(decode(enc, GOLDEN_GROUND).values, image.values)

    def test_coefficients_are_integral(self, golden):
        _, _, _, model = golden
        for c in list(model.linear.values()) + list(model.quadratic.values()):
            assert float(c).is_integer()


class TestBitEncoding:
    def test_variable_layout(self):
        enc = BitEncoding(n=3, bits_per_pixel=2)
        assert enc.num_variables == 18
        assert enc.variable_index(0, 0, 0) == 0
        assert enc.variable_index(0, 0, 1) == 1
        assert enc.variable_index(0, 1, 0) == 2
        assert enc.variable_index(1, 0, 0) == 6
        assert enc.variable_index(2, 2, 1) == 17

    def test_validation(self):
        with pytest.raises(ValueError):
            BitEncoding(n=0, bits_per_pixel=1)
        with pytest.raises(ValueError):
            BitEncoding(n=2, bits_per_pixel=0)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2 ** 31), n=st.integers(1, 5),
           bits=st.integers(1, 4))
    def test_encode_decode_round_trip(self, seed, n, bits):
        rng = np.random.default_rng(seed)
        image = ImageGrid(rng.integers(0, 1 << bits, size=(n, n)))
        enc = BitEncoding(n=n, bits_per_pixel=bits)
        assert np.array_equal(decode(enc, encode(enc, image)).values,
                              image.values)

    def test_all_ones_decodes_to_full_scale(self):
        enc = BitEncoding(n=2, bits_per_pixel=3)
        img = decode(enc, np.ones(enc.num_variables, dtype=int))
        assert np.all(img.values == 7)

    def test_encode_rejects_bad_images(self):
        enc = BitEncoding(n=2, bits_per_pixel=1)
        with pytest.raises(ValueError):
            encode(enc, ImageGrid(np.full((2, 2), 2)))
        with pytest.raises(ValueError):
            encode(enc, ImageGrid(np.full((2, 2), 0.5)))
        with pytest.raises(ValueError):
            encode(enc, ImageGrid(np.zeros((3, 3))))

    def test_decode_rejects_bad_assignments(self):
        enc = BitEncoding(n=2, bits_per_pixel=1)
        with pytest.raises(ValueError):
            decode(enc, np.zeros(5, dtype=int))
        with pytest.raises(ValueError):
            decode(enc, np.array([0, 1, 2, 0]))


class TestBuildQubo:
    def test_zero_target_has_positive_linear_and_zero_offset(self):
        geo = ProjectionGeometry(n=2, angles=np.array([0.0, 90.0]))
        A = build_projector(geo)
        zero = Sinogram(geometry=geo, values=np.zeros((2, 2)))
        model = build_qubo(A, zero, bits_per_pixel=2)
        assert model.offset == 0.0
        assert all(c > 0 for c in model.linear.values())
        assert qubo_energy(model, np.zeros(8, dtype=int)) == 0.0

    def test_validation(self, golden):
        _, projector, target, _ = golden
        with pytest.raises(ValueError):
            build_qubo(projector, target, bits_per_pixel=0)
        other = ProjectionGeometry(n=2, angles=np.array([0.0]))
        with pytest.raises(ValueError):
            build_qubo(projector,
                       Sinogram(geometry=other, values=np.zeros((1, 2))),
                       bits_per_pixel=1)
        with pytest.raises(ValueError):
            build_qubo(projector, target, bits_per_pixel=1,
                       row_mask=np.ones(3, dtype=bool))

    def test_perfect_reconstruction_sits_at_negative_offset(self):
        image, _, _, target, model, enc = make_instance(
            n=3, bits=2, n_angles=3, seed=5)
        q = encode(enc, image)
        assert abs(qubo_energy(model, q) + model.offset) < 1e-9

    def test_row_mask_drops_rows(self):
        image, _, projector, target, _, enc = make_instance(
            n=3, bits=1, n_angles=2, seed=8)
        mask = np.ones(projector.n_rows, dtype=bool)
        mask[::2] = False
        model = build_qubo(projector, target, bits_per_pixel=1, row_mask=mask)
        rng = np.random.default_rng(0)
        for _ in range(50):
            q = rng.integers(0, 2, size=model.num_variables)
            oracle = residual_energy(projector, target, enc, q, row_mask=mask)
            assert abs(qubo_energy(model, q) - oracle) < 1e-9

    def test_integer_inputs_give_integer_coefficients(self):
        _, _, _, _, model, _ = make_instance(
            n=4, bits=2, n_angles=2, seed=3, uniform_angles=True)
        # 0 and 90 degrees only -> all weights are whole pixel areas.
        assert all(float(c).is_integer() for c in model.linear.values())
        assert all(float(c).is_integer() for c in model.quadratic.values())
        assert float(model.offset).is_integer()


class TestModelInvariants:
    def test_keys_upper_triangular_and_nonzero(self):
        for seed in range(5):
            _, _, _, _, model, _ = make_instance(
                n=3, bits=2, n_angles=3, seed=seed)
            for (u, v), c in model.quadratic.items():
                assert 0 <= u < v < model.num_variables
                assert abs(c) >= 1e-12
            for v, c in model.linear.items():
                assert 0 <= v < model.num_variables
                assert abs(c) >= 1e-12
            assert model.offset >= 0.0

    def test_constructor_validation(self):
        with pytest.raises(ValueError):
            QuboModel(num_variables=2, linear={2: 1.0}, quadratic={})
        with pytest.raises(ValueError):
            QuboModel(num_variables=2, linear={}, quadratic={(1, 0): 1.0})
        with pytest.raises(ValueError):
            QuboModel(num_variables=2, linear={}, quadratic={(0, 0): 1.0})
        with pytest.raises(ValueError):
            QuboModel(num_variables=2, linear={}, quadratic={}, offset=-1.0)

    def test_symmetric_matrix_preserves_energies(self):
        _, _, _, _, model, _ = make_instance(n=3, bits=1, n_angles=3, seed=7)
        M = model.symmetric_matrix()
        assert np.allclose(M, M.T)
        rng = np.random.default_rng(1)
        for _ in range(30):
            q = rng.integers(0, 2, size=model.num_variables).astype(float)
            assert abs(q @ M @ q - qubo_energy(model, q)) < 1e-9

    def test_energy_plus_offset_is_nonnegative(self):
        _, _, _, _, model, _ = make_instance(n=2, bits=2, n_angles=2, seed=4)
        states = all_assignments(model.num_variables)
        energies = qubo_energies(model, states)
        assert np.all(energies + model.offset >= -1e-9)


class TestOracleEquivalence:
    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2 ** 31), n=st.integers(2, 4),
           bits=st.integers(1, 2), n_angles=st.integers(2, 4))
    def test_energy_matches_residual_oracle(self, seed, n, bits, n_angles):
        _, _, projector, target, model, enc = make_instance(
            n=n, bits=bits, n_angles=n_angles, seed=seed)
        V = model.num_variables
        tol = 1e-9 * max(1.0, model.offset)
        if V <= 16:
            states = all_assignments(V)
        else:
            rng = np.random.default_rng(seed + 1)
            states = rng.integers(0, 2, size=(1000, V))
        energies = qubo_energies(model, states)
        oracle = residual_energies(projector, target, enc, states)
        assert np.max(np.abs(energies - oracle)) < tol


class TestEvaluation:
    def test_qubo_energy_validates_length_and_values(self, golden):
        _, _, _, model = golden
        with pytest.raises(ValueError):
            qubo_energy(model, np.zeros(7, dtype=int))
        with pytest.raises(ValueError):
            qubo_energy(model, np.full(8, 2))

    def test_batch_matches_scalar(self, golden):
        _, _, _, model = golden
        states = all_assignments(8)
        batch = qubo_energies(model, states)
        for k in (0, 1, 77, 201, 255):
            assert batch[k] == qubo_energy(model, states[k])

    def test_batch_validates_shape(self, golden):
        _, _, _, model = golden
        with pytest.raises(ValueError):
            qubo_energies(model, np.zeros((4, 7)))


class TestSerialization:
    def test_json_round_trip(self, golden, tmp_path):
        _, _, _, model = golden
        path = tmp_path / "model.json"
        save_qubo(model, path)
        back = load_qubo(path)
        assert back.num_variables == model.num_variables
        assert back.linear == model.linear
        assert back.quadratic == model.quadratic
        assert back.offset == model.offset

    def test_json_entries_sorted(self, golden, tmp_path):
        import json
        _, _, _, model = golden
        path = tmp_path / "model.json"
        save_qubo(model, path)
        data = json.loads(path.read_text())
        assert data["linear"] == sorted(data["linear"])
        assert data["quadratic"] == sorted(data["quadratic"])
