import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import j0

from resonant_oscillator import (
    ModulatedGaussianParams,
    RadialQuadrature,
    RadialState,
    apply_h0_mult,
    apply_laplacian,
    apply_lambda,
    apply_x2,
    complex_gaussian_coeffs,
    free_flow,
    gaussian_fourier,
    grid_h1_norm_sq,
    grid_l2_norm,
    hermite_radial,
    hermite_radial_table,
    lens_transform,
    modulated_gaussian_h1_sq,
    modulated_gaussian_profile,
    sobolev_norm,
    synthesize,
)
from resonant_oscillator.operators import h0_mult_matrix

SQRT_PI = math.sqrt(math.pi)


def random_state(n_modes: int, seed: int) -> RadialState:
    rng = np.random.default_rng(seed)
    c = rng.normal(size=n_modes) + 1j * rng.normal(size=n_modes)
    return RadialState(c / np.linalg.norm(c))


def project(rule: RadialQuadrature, values: np.ndarray, k_max: int) -> np.ndarray:
    table = hermite_radial_table(k_max, rule.nodes)
    return (table * rule.weights) @ values


class TestBandOperators:
    def test_x2_on_ground_state(self):
        out = apply_x2(RadialState.basis_state(0, 4))
        np.testing.assert_array_equal(out.coeffs, [1.0, -1.0, 0.0, 0.0])

    def test_laplacian_on_ground_state(self):
        out = apply_laplacian(RadialState.basis_state(0, 4))
        np.testing.assert_array_equal(out.coeffs, [-1.0, -1.0, 0.0, 0.0])

    def test_zero_state_maps_to_zero(self):
        zero = RadialState.zeros(6)
        for op in (apply_x2, apply_laplacian, apply_lambda):
            assert op(zero).l2_norm() == 0.0

    def test_oscillator_diagonal_exact(self):
        # (-Delta + |x|^2) h_k = (4k+2) h_k in integer band arithmetic
        n_modes = 128
        for k in (0, 1, 5, 63, 127):
            e_k = RadialState.basis_state(k, n_modes)
            image = apply_x2(e_k).coeffs - apply_laplacian(e_k).coeffs
            expected = np.zeros(n_modes, dtype=complex)
            expected[k] = 4 * k + 2
            np.testing.assert_array_equal(image, expected)

    def test_bandwidth_one(self):
        for op in (apply_x2, apply_laplacian, apply_lambda):
            out = op(RadialState.basis_state(6, 16)).coeffs
            assert np.all(out[:5] == 0.0) and np.all(out[8:] == 0.0)

    def test_x2_matches_projection_oracle(self, rule30):
        state = random_state(12, seed=3)
        f_vals = synthesize(state, rule30.nodes)
        oracle = project(rule30, rule30.nodes**2 * f_vals, 13)
        out = apply_x2(state).coeffs
        np.testing.assert_allclose(out, oracle[:12], atol=1e-9)
        assert abs(oracle[12]) == pytest.approx(apply_x2(state).spill, abs=1e-9)

    def test_lambda_on_first_modes(self):
        out0 = apply_lambda(RadialState.basis_state(0, 4)).coeffs
        np.testing.assert_array_equal(out0, [-1.0, 1.0, 0.0, 0.0])
        out1 = apply_lambda(RadialState.basis_state(1, 4)).coeffs
        np.testing.assert_array_equal(out1, [-1.0, -1.0, 2.0, 0.0])

    def test_lambda_matches_derivative_oracle(self, rule30):
        # x . grad f by numerical differentiation of the synthesized profile
        state = random_state(10, seed=5)
        r = rule30.nodes
        h = 1e-5
        df = (synthesize(state, r + h) - synthesize(state, r - h)) / (2.0 * h)
        oracle = project(rule30, r * df, 9)
        np.testing.assert_allclose(apply_lambda(state).coeffs, oracle, atol=1e-6)

    def test_spill_reported(self):
        top = RadialState.basis_state(3, 4)
        assert apply_x2(top).spill == pytest.approx(4.0)  # -(k+1) c_k at k = 3


class TestH0Multiplication:
    def test_ground_state_image(self):
        out = apply_h0_mult(RadialState.basis_state(0, 8)).coeffs
        assert out[1].real == pytest.approx(2.0 / (9.0 * SQRT_PI), abs=1e-14)

    def test_linearity(self):
        state = random_state(8, seed=9)
        doubled = RadialState(2.0 * state.coeffs)
        np.testing.assert_allclose(
            apply_h0_mult(doubled).coeffs, 2.0 * apply_h0_mult(state).coeffs, rtol=1e-14
        )

    def test_quadratic_form_matches_quadrature(self, rule30):
        # integral h_0 f^2 for real f = h_0 + h_1
        f = RadialState(np.array([1.0, 1.0], dtype=complex))
        form = np.real(np.vdot(f.coeffs, apply_h0_mult(f).coeffs))
        f_vals = synthesize(f, rule30.nodes)
        oracle = rule30.integrate(hermite_radial(0, rule30.nodes) * f_vals.real**2)
        assert form == pytest.approx(oracle, abs=1e-9)

    def test_matrix_symmetric_positive(self):
        m = h0_mult_matrix(32)
        np.testing.assert_array_equal(m, m.T)
        assert np.all(m > 0.0)

    def test_row_sums_constant_interior(self):
        # full row sums equal 1/sqrt(pi) (generating function at t = 1);
        # decay only reflects truncation
        m = h0_mult_matrix(48)
        np.testing.assert_allclose(m.sum(axis=1)[:8], 1.0 / SQRT_PI, rtol=1e-12)

    def test_entries_decay_geometrically_off_diagonal(self):
        m = h0_mult_matrix(48)
        # first column is exactly (2/sqrt(pi)) 3^{-(n+1)}
        np.testing.assert_allclose(m[1:, 0] / m[:-1, 0], 1.0 / 3.0, rtol=1e-12)
        # away from the diagonal every row decays at least geometrically
        for n in (0, 10, 25, 40):
            row = m[n]
            for k in range(n + 6, 46):
                assert row[k + 2] < 0.85 * row[k]


class TestFreeFlow:
    def test_identity_at_zero(self):
        state = random_state(9, seed=13)
        np.testing.assert_array_equal(free_flow(state, 0.0).coeffs, state.coeffs)

    def test_half_pi_parity(self):
        # e^{i (pi/2)(4n+2)} = e^{i(2 pi n + pi)} = -1 for every mode
        state = random_state(9, seed=17)
        np.testing.assert_allclose(
            free_flow(state, math.pi / 2.0).coeffs, -state.coeffs, atol=1e-13
        )

    @pytest.mark.parametrize("r", [0.0, 1.0, 2.0, 3.5])
    def test_norm_preserved(self, r):
        state = random_state(14, seed=19)
        rotated = free_flow(state, 0.7318)
        assert sobolev_norm(rotated, r) == pytest.approx(sobolev_norm(state, r), rel=1e-14)


class TestGaussianFourier:
    def test_normalisation(self):
        assert gaussian_fourier(0.5, 0.0) == pytest.approx(1.0)

    def test_ground_state_fixed_point(self):
        # the u = 1/2 Gaussian is its own transform
        for xi_sq in (0.0, 0.7, 2.3):
            assert gaussian_fourier(0.5, xi_sq) == pytest.approx(math.exp(-xi_sq / 2.0))

    def test_complex_value(self):
        expected = 1.0 / (1.0 + 2.0j) * np.exp(-1.0 / (2.0 + 4.0j))
        assert gaussian_fourier(0.5 + 1.0j, 1.0) == pytest.approx(expected, rel=1e-14)

    def test_against_oscillatory_quadrature(self):
        # (1/2pi) integral_{R^2} e^{-u|x|^2} e^{-i x.xi} dx
        #   = integral_0^inf e^{-u r^2} J_0(r |xi|) r dr
        u, xi = 0.5 + 1.0j, 1.0
        re = quad(lambda r: math.cos(0.0) * np.real(np.exp(-u * r * r)) * j0(r * xi) * r, 0, 30, limit=400)[0]
        im = quad(lambda r: np.imag(np.exp(-u * r * r)) * j0(r * xi) * r, 0, 30, limit=400)[0]
        assert gaussian_fourier(u, xi**2) == pytest.approx(re + 1j * im, abs=1e-10)

    def test_rejects_zero_and_growing(self):
        with pytest.raises(ValueError):
            gaussian_fourier(0.0, 1.0)
        with pytest.raises(ValueError):
            gaussian_fourier(-0.1, 1.0)


def h1_grid(params: ModulatedGaussianParams) -> float:
    scale = max(params.N * abs(params.eta), 1.0 / params.N, 1.0)
    radii = np.linspace(0.0, 9.0 * scale, 6001)
    return grid_h1_norm_sq(radii, modulated_gaussian_profile(params, radii))


class TestModulatedGaussian:
    def test_derived_identity_validated(self):
        with pytest.raises(ValueError):
            ModulatedGaussianParams(N=-1.0)
        p = ModulatedGaussianParams(N=1.5, m=0.3, c=-0.7)
        assert (p.z * np.conj(p.eta)).real == pytest.approx(1.0, abs=1e-15)

    def test_ground_state_norm(self):
        assert modulated_gaussian_h1_sq(ModulatedGaussianParams(N=1.0)) == 2.0

    def test_pure_dilation(self):
        assert modulated_gaussian_h1_sq(ModulatedGaussianParams(N=2.0)) == 4.25

    def test_full_modulation(self):
        p = ModulatedGaussianParams(N=1.0, m=1.0, c=1.0)
        assert modulated_gaussian_h1_sq(p) == pytest.approx(34.0)

    def test_profile_is_normalised(self):
        p = ModulatedGaussianParams(N=1.7, m=-0.4, c=0.9)
        radii = np.linspace(0.0, 30.0, 8001)
        assert grid_l2_norm(radii, modulated_gaussian_profile(p, radii)) == pytest.approx(
            1.0, abs=1e-9
        )

    def test_closed_form_matches_grid(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            p = ModulatedGaussianParams(
                N=float(rng.uniform(0.5, 2.5)),
                m=float(rng.uniform(-1.0, 1.0)),
                c=float(rng.uniform(-1.0, 1.0)),
            )
            closed = modulated_gaussian_h1_sq(p)
            assert h1_grid(p) == pytest.approx(closed, rel=1e-6)

    def test_grid_h1_on_basis_states(self):
        radii = np.linspace(0.0, 14.0, 8001)
        for k in (0, 1, 3):
            state = RadialState.basis_state(k, k + 1)
            vals = synthesize(state, radii)
            assert grid_h1_norm_sq(radii, vals) == pytest.approx(4 * k + 2, rel=1e-6)


class TestComplexGaussianCoeffs:
    def test_dilated_ground_state_vs_projection(self, rule30):
        big_n = 2.0
        state = complex_gaussian_coeffs(1.0 / (big_n * SQRT_PI), 1.0 / big_n**2, 24)
        profile = hermite_radial(0, rule30.nodes / big_n) / big_n
        table = hermite_radial_table(23, rule30.nodes)
        oracle = (table * rule30.weights) @ profile
        np.testing.assert_allclose(state.coeffs, oracle, atol=1e-10)

    def test_unit_mass_for_any_dilation(self):
        for big_n in (0.4, 1.0, 1.9):
            state = complex_gaussian_coeffs(1.0 / (big_n * SQRT_PI), 1.0 / big_n**2, 96)
            assert state.l2_norm() == pytest.approx(1.0, abs=1e-12)

    def test_rejects_non_decaying(self):
        with pytest.raises(ValueError):
            complex_gaussian_coeffs(1.0, -0.2 + 1.0j, 8)


class TestLensTransform:
    radii = np.linspace(0.0, 8.0, 1601)

    def test_identity(self):
        v = hermite_radial(0, self.radii).astype(complex)
        out = lens_transform(self.radii, v, 1.0, 0.0, 0.0, self.radii)
        np.testing.assert_allclose(out, v, atol=1e-12)

    def test_dilation_preserves_mass(self):
        v = hermite_radial(0, self.radii).astype(complex)
        wide = np.linspace(0.0, 16.0, 3201)  # covers the dilated support
        out = lens_transform(self.radii, v, 2.0, 0.0, 0.0, wide)
        expected = 0.5 * hermite_radial(0, wide / 2.0)
        np.testing.assert_allclose(out, expected, atol=1e-8)
        assert grid_l2_norm(wide, out) == pytest.approx(
            grid_l2_norm(self.radii, v), abs=1e-8
        )

    def test_phase_curvature_leaves_modulus(self):
        v = hermite_radial(0, self.radii).astype(complex)
        flat = lens_transform(self.radii, v, 1.3, 0.0, 0.0, self.radii)
        curved = lens_transform(self.radii, v, 1.3, 2.7, 0.0, self.radii)
        np.testing.assert_allclose(np.abs(curved), np.abs(flat), atol=1e-13)

    def test_out_of_domain_rejected(self):
        v = hermite_radial(0, self.radii).astype(complex)
        with pytest.raises(ValueError, match="outside the sampled domain"):
            lens_transform(self.radii, v, 0.5, 0.0, 0.0, self.radii)

    def test_unitary_for_generic_state(self):
        state = random_state(6, seed=31)
        wide = np.linspace(0.0, 16.0, 3201)
        v = synthesize(state, wide)
        out = lens_transform(wide, v, 1.6, 1.1, 0.4, wide)
        assert grid_l2_norm(wide, out) == pytest.approx(grid_l2_norm(wide, v), abs=1e-8)
