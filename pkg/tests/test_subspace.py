import numpy as np
import pytest

from specfuse import (
    CoefficientPair,
    DegeneracyError,
    HsCube,
    ParameterError,
    ParseError,
    ShapeError,
    SpatialDegradation,
    SpectralBasis,
    SpectralResponse,
    apply_spatial_degradation,
    compute_x,
    consistency_residual,
    decompose_exact,
    derive_coefficients,
    fold,
    spectral_subspace_from_lrhs,
    synthetic_decaying_cube,
    synthetic_rank_r_cube,
    unfold,
)

from conftest import random_cube


def random_basis(rng, bands, rank):
    q, _ = np.linalg.qr(rng.standard_normal((bands, rank)))
    return SpectralBasis(q)


class TestSpectralBasis:
    def test_orthonormality_enforced(self, rng):
        with pytest.raises(DegeneracyError):
            SpectralBasis(rng.standard_normal((6, 3)))

    def test_wide_matrix_rejected(self):
        with pytest.raises(ShapeError):
            SpectralBasis(np.eye(3)[:2])

    def test_properties(self, rng):
        basis = random_basis(rng, 8, 3)
        assert basis.bands == 8
        assert basis.rank == 3


class TestSubspaceFromObservation:
    def test_exact_rank_projection_is_lossless(self, rng):
        z = synthetic_rank_r_cube(6, 6, 12, 4, rng)
        basis = spectral_subspace_from_lrhs(z, 4)
        mat = unfold(z)
        residual = mat - mat @ basis.v @ basis.v.T
        assert np.linalg.norm(residual) <= 1e-10 * np.linalg.norm(mat)

    def test_full_rank_request_is_complete(self, rng):
        z = random_cube(rng, 5, 4, 4)
        basis = spectral_subspace_from_lrhs(z, 5)
        np.testing.assert_allclose(basis.v @ basis.v.T, np.eye(5), atol=1e-12)

    def test_rank_five_example(self, rng):
        z = synthetic_rank_r_cube(8, 8, 31, 5, rng)
        basis = spectral_subspace_from_lrhs(z, 5)
        mat = unfold(z)
        err = np.linalg.norm(mat - mat @ basis.v @ basis.v.T) / np.linalg.norm(mat)
        assert err < 1e-10

    @pytest.mark.parametrize("rank", [0, -1, 100, 2.5])
    def test_rank_out_of_range(self, rng, rank):
        z = random_cube(rng, 5, 4, 4)
        with pytest.raises(ParameterError):
            spectral_subspace_from_lrhs(z, rank)

    def test_repeat_calls_bitwise_identical(self, rng):
        z = random_cube(rng, 9, 6, 6)
        a = spectral_subspace_from_lrhs(z, 4)
        b = spectral_subspace_from_lrhs(z, 4)
        assert np.array_equal(a.v, b.v)

    def test_sign_convention(self, rng):
        z = random_cube(rng, 9, 6, 6)
        basis = spectral_subspace_from_lrhs(z, 4)
        for j in range(4):
            col = basis.v[:, j]
            assert col[np.argmax(np.abs(col))] > 0


class TestDeriveCoefficients:
    def test_hand_example(self):
        basis = SpectralBasis(np.eye(3)[:, :2])
        resp = SpectralResponse(np.array([[1.0], [0.0], [0.0]]))
        coeff = derive_coefficients(basis, resp)
        np.testing.assert_allclose(coeff.a, [[1.0, 0.0, 0.0]], atol=1e-14)
        np.testing.assert_allclose(coeff.b, [[0.0, 1.0, 0.0]], atol=1e-14)

    def test_rank_equal_channels_rejected(self, rng):
        basis = random_basis(rng, 5, 2)
        resp = SpectralResponse(rng.standard_normal((5, 2)))
        with pytest.raises(ParameterError):
            derive_coefficients(basis, resp)

    def test_band_mismatch(self, rng, cave_response):
        basis = random_basis(rng, 30, 5)
        with pytest.raises(ShapeError):
            derive_coefficients(basis, cave_response)

    def test_response_collapsing_inside_subspace(self):
        # the subspace is orthogonal to the only response column
        basis = SpectralBasis(np.eye(5)[:, 1:3])
        resp = SpectralResponse(np.eye(5)[:, :1])
        with pytest.raises(DegeneracyError, match="collapses"):
            derive_coefficients(basis, resp)

    def test_left_inverse_properties(self, rng, cave_response):
        basis = random_basis(rng, 31, 8)
        coeff = derive_coefficients(basis, cave_response)
        np.testing.assert_allclose(coeff.a @ cave_response.matrix, np.eye(3), atol=1e-10)
        np.testing.assert_allclose(
            coeff.b @ cave_response.matrix, np.zeros((5, 3)), atol=1e-10
        )

    def test_b_has_orthonormal_rows(self, rng, cave_response):
        basis = random_basis(rng, 31, 8)
        coeff = derive_coefficients(basis, cave_response)
        np.testing.assert_allclose(coeff.b @ coeff.b.T, np.eye(5), atol=1e-10)
        sv = np.linalg.svd(coeff.b, compute_uv=False)
        assert abs(sv[-1] - 1.0) <= 1e-10
        assert abs(sv[0] - 1.0) <= 1e-10

    def test_rows_stay_inside_subspace(self, rng, cave_response):
        basis = random_basis(rng, 31, 8)
        coeff = derive_coefficients(basis, cave_response)
        complement = np.eye(31) - basis.v @ basis.v.T
        assert np.linalg.norm(coeff.a @ complement) <= 1e-10
        assert np.linalg.norm(coeff.b @ complement) <= 1e-10

    def test_a_invariant_under_basis_rotation(self, rng, cave_response):
        basis = random_basis(rng, 31, 8)
        q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
        rotated = SpectralBasis(basis.v @ q)
        coeff = derive_coefficients(basis, cave_response)
        coeff_rot = derive_coefficients(rotated, cave_response)
        np.testing.assert_allclose(coeff_rot.a, coeff.a, atol=1e-10)

    def test_repeat_calls_bitwise_identical(self, rng, cave_response):
        basis = random_basis(rng, 31, 8)
        c1 = derive_coefficients(basis, cave_response)
        c2 = derive_coefficients(basis, cave_response)
        assert np.array_equal(c1.a, c2.a)
        assert np.array_equal(c1.b, c2.b)


class TestCoefficientPair:
    def test_stacked_rank_enforced(self):
        a = np.array([[1.0, 0.0, 0.0]])
        with pytest.raises(DegeneracyError):
            CoefficientPair(a, a.copy())

    def test_more_rows_than_bands_rejected(self):
        with pytest.raises(ShapeError):
            CoefficientPair(np.eye(2), np.eye(2)[::-1])

    def test_csv_round_trip_bitwise(self, rng, cave_response, tmp_path):
        coeff = derive_coefficients(random_basis(rng, 31, 6), cave_response)
        path = tmp_path / "coeff.csv"
        coeff.to_csv(path)
        again = CoefficientPair.from_csv(path)
        assert np.array_equal(again.a, coeff.a)
        assert np.array_equal(again.b, coeff.b)

    def test_from_csv_bad_header(self, tmp_path):
        path = tmp_path / "coeff.csv"
        path.write_text("1,2\n1,0,0\n0,1,0\n")
        with pytest.raises(ParseError, match="line 1"):
            CoefficientPair.from_csv(path)

    def test_from_csv_wrong_field_count(self, tmp_path):
        path = tmp_path / "coeff.csv"
        path.write_text("1,2,3\n1,0,0\n0,1\n")
        with pytest.raises(ParseError, match="line 3"):
            CoefficientPair.from_csv(path)

    def test_from_csv_wrong_row_count(self, tmp_path):
        path = tmp_path / "coeff.csv"
        path.write_text("1,2,3\n1,0,0\n")
        with pytest.raises(ParseError, match="2 coefficient rows"):
            CoefficientPair.from_csv(path)


class TestDecomposeExact:
    def test_exact_rank_round_trip(self, rng, cave_response):
        x = synthetic_rank_r_cube(10, 10, 31, 6, rng)
        y, yhat, coeff = decompose_exact(x, cave_response, 6)
        rebuilt = compute_x(y, yhat, coeff)
        err = np.linalg.norm(rebuilt.planes - x.planes) / np.linalg.norm(x.planes)
        assert err <= 1e-10

    def test_projection_only_cube_needs_tiny_hidden_part(self, rng, cave_response):
        """A cube built purely from the sharp observation leaves almost no
        energy for the hidden component.

        The spectral rank guard needs the extra direction to be present at
        all, so it is seeded at a 1e-6 relative amplitude rather than zero.
        """
        basis = random_basis(rng, 31, 4)
        coeff = derive_coefficients(basis, cave_response)
        y0 = random_cube(rng, 3, 8, 8)
        tiny = HsCube(1e-6 * rng.standard_normal((1, 8, 8)))
        x = compute_x(y0, tiny, coeff)
        _, yhat, _ = decompose_exact(x, cave_response, 4)
        energy_fraction = (np.linalg.norm(yhat.planes) / np.linalg.norm(x.planes)) ** 2
        assert energy_fraction <= 1e-10

    def test_truncation_error_near_optimal(self, rng, cave_response):
        cube, sv = synthetic_decaying_cube(16, 16, 31, rng, decay=0.6)
        rank = 10
        y, yhat, coeff = decompose_exact(cube, cave_response, rank)
        rebuilt = compute_x(y, yhat, coeff)
        err = np.linalg.norm(rebuilt.planes - cube.planes)
        optimal = float(np.sqrt(np.sum(sv[rank:] ** 2)))
        assert err <= 2.0 * optimal
        assert err >= optimal * (1.0 - 1e-12)

    def test_rank_deficient_cube_rejected(self, rng, cave_response):
        x = synthetic_rank_r_cube(10, 10, 31, 4, rng)
        with pytest.raises(DegeneracyError):
            decompose_exact(x, cave_response, 8)

    def test_band_mismatch(self, rng, cave_response):
        x = random_cube(rng, 30, 6, 6)
        with pytest.raises(ShapeError):
            decompose_exact(x, cave_response, 5)

    def test_rank_out_of_range(self, rng, cave_response):
        x = random_cube(rng, 31, 6, 6)
        with pytest.raises(ParameterError):
            decompose_exact(x, cave_response, 0)


class TestConsistencyResidual:
    def build(self, rng, cave_response, rank=6):
        x = synthetic_rank_r_cube(16, 16, 31, rank, rng)
        deg = SpatialDegradation.uniform(4)
        y, yhat, coeff = decompose_exact(x, cave_response, rank)
        z = apply_spatial_degradation(x, deg)
        return x, y, z, yhat, coeff, deg

    def test_noise_free_residual_vanishes(self, rng, cave_response):
        _, y, z, yhat, coeff, deg = self.build(rng, cave_response)
        assert consistency_residual(y, z, deg, coeff, yhat) <= 1e-10

    def test_grows_monotonically_with_perturbation(self, rng, cave_response):
        _, y, z, yhat, coeff, deg = self.build(rng, cave_response)
        direction = rng.standard_normal(yhat.planes.shape)
        direction *= np.linalg.norm(yhat.planes) / np.linalg.norm(direction)
        residuals = [
            consistency_residual(
                y, z, deg, coeff, HsCube(yhat.planes + delta * direction)
            )
            for delta in (1e-4, 1e-3, 1e-2, 1e-1)
        ]
        assert all(b > a for a, b in zip(residuals, residuals[1:]))

    @pytest.mark.parametrize("sigma", [1e-3, 1e-2])
    def test_tracks_noise_energy(self, rng, cave_response, sigma):
        _, y, z, yhat, coeff, deg = self.build(rng, cave_response)
        noise = rng.normal(0.0, sigma, z.planes.shape)
        noisy = HsCube(z.planes + noise)
        residual = consistency_residual(y, noisy, deg, coeff, yhat)
        expected = np.linalg.norm(noise) / np.linalg.norm(noisy.planes)
        assert abs(residual - expected) <= 0.2 * expected

    def test_shape_errors(self, rng, cave_response):
        _, y, z, yhat, coeff, deg = self.build(rng, cave_response)
        bad_y = HsCube(np.zeros((2, y.height, y.width)))
        with pytest.raises(ShapeError):
            consistency_residual(bad_y, z, deg, coeff, yhat)
        wrong_grid = HsCube(np.zeros((yhat.bands, 8, 8)))
        with pytest.raises(ShapeError):
            consistency_residual(y, z, deg, coeff, wrong_grid)
        wrong_bands = HsCube(np.zeros((5, z.height, z.width)))
        with pytest.raises(ShapeError):
            consistency_residual(y, wrong_bands, deg, coeff, yhat)
