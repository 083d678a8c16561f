import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from resonant_oscillator import (
    RadialState,
    alpha_const,
    beta,
    construct_remainder,
    grid_h1_norm_sq,
    grid_l2_norm,
    measure_growth,
    potential_field,
    reconstruct_u,
    rhs_renormalized,
    sobolev_norm,
    source_term,
    u_h1_norm_sq,
)
from resonant_oscillator.evolution import TruncationSpillError

SQRT_PI = math.sqrt(math.pi)
S0 = 20.0


class TestAlpha:
    def test_value(self):
        assert alpha_const() == pytest.approx(-4.5 * SQRT_PI, rel=1e-15)
        assert alpha_const() == pytest.approx(-7.9760423, abs=1e-7)

    def test_sign(self):
        assert alpha_const() < 0.0

    def test_ratio_recomputation(self):
        # (h_1, |y|^2 h_0) = -1 against the closed-form triple product
        assert alpha_const(verify=True) == alpha_const()


class TestSourceTerm:
    def test_first_mode_cancellation(self):
        rng = np.random.default_rng(3)
        for s in np.exp(rng.uniform(1.2, 10.0, 10)):
            state = source_term(float(s), n_modes=16)
            assert abs(state.coeffs[1]) <= 1e-12

    def test_matches_band_assembly(self):
        s = 37.0
        state = source_term(s, n_modes=12)
        h0 = RadialState.basis_state(0, 12)
        from resonant_oscillator import apply_h0_mult, apply_x2

        expected = beta(s) * (
            apply_x2(h0).coeffs - alpha_const() * apply_h0_mult(h0).coeffs
        )
        np.testing.assert_allclose(state.coeffs, expected, atol=1e-15)


class TestRenormalizedRhs:
    def test_ground_state_stationary_where_beta_vanishes(self):
        s = 3.0 * math.pi / 2.0  # sin(4s) = 0
        out = rhs_renormalized(s, RadialState.basis_state(0, 8))
        assert np.max(np.abs(out)) <= 1e-12

    def test_ground_state_derivative_is_source(self):
        s = 123.4
        out = rhs_renormalized(s, RadialState.basis_state(0, 16))
        np.testing.assert_allclose(out, -1j * source_term(s, 16).coeffs, atol=1e-15)
        assert abs(out[1]) <= 1e-12  # no drive on the first mode

    def test_generator_is_hermitian(self):
        rng = np.random.default_rng(7)
        c = rng.normal(size=24) + 1j * rng.normal(size=24)
        state = RadialState(c)
        out = rhs_renormalized(57.3, state)
        # d/ds ||v||^2 = 2 Re <v', v> must vanish
        assert abs(np.real(np.vdot(state.coeffs, out))) <= 1e-12 * np.linalg.norm(c) ** 2


class TestConstructRemainder:
    def test_terminal_condition(self, pde_base):
        assert np.all(pde_base.g[-1] == 0.0)
        assert pde_base.s[-1] == 1e3

    def test_mass_conservation(self, pde_base):
        mass = pde_base.v_mass()
        assert np.max(np.abs(mass - mass[0])) <= 1e-8

    def test_envelope_bounded(self, pde_base):
        half = pde_base.s <= pde_base.M / 2.0
        env = (np.sqrt(pde_base.s) * pde_base.w_sobolev(2.0))[half]
        assert env.max() < 1.0

    def test_envelope_stable_under_doubling(self, pde_base, pde_2m, pde_2k):
        r = 2.0
        half = pde_base.s <= pde_base.M / 2.0
        base_const = (np.sqrt(pde_base.s) * pde_base.w_sobolev(r))[half].max()
        m_half = pde_2m.s <= pde_2m.M / 2.0
        m_const = (np.sqrt(pde_2m.s) * pde_2m.w_sobolev(r))[m_half].max()
        k_const = (np.sqrt(pde_2k.s) * pde_2k.w_sobolev(r))[half].max()
        assert m_const / base_const < 1.5 and base_const / m_const < 1.5
        assert abs(k_const - base_const) < 1e-6

    def test_cauchy_in_horizon(self, pde_base, pde_2m):
        # the two grids share the base section exactly: no interpolation
        n = pde_base.s.size
        np.testing.assert_array_equal(pde_base.s, pde_2m.s[:n])
        lam = (4.0 * np.arange(pde_base.n_modes) + 2.0) ** 2
        half = pde_base.s <= pde_base.M / 2.0
        diff = pde_base.g[half] - pde_2m.g[:n][half]
        gap = np.sqrt((np.abs(diff) ** 2 * lam).sum(axis=1)).max()
        assert gap <= 1e-3

    def test_truncation_robustness(self, pde_base, pde_2k):
        # doubling the truncation moves ||w||_{H^2} by less than 1e-6
        n1 = pde_base.w_sobolev(2.0)
        n2 = pde_2k.w_sobolev(2.0)
        assert np.max(np.abs(n1 - n2)) < 1e-6

    def test_interaction_picture_matches_direct_integration(self):
        # rotate-then-integrate against direct stepping of the remainder equation
        n_modes, m_top = 24, 24.0
        run = construct_remainder(m_top, S0, n_modes=n_modes, s_grid=np.linspace(S0, m_top, 33))

        def direct_rhs(s, w):
            # i w' = (H - 2) w + beta |y|^2 w + W w + R(s): the homogeneous part
            # is the renormalized generator, the source is R(s)
            return rhs_renormalized(s, RadialState(w)) - 1j * source_term(s, n_modes).coeffs

        sol = solve_ivp(
            direct_rhs,
            (m_top, S0),
            np.zeros(n_modes, complex),
            rtol=1e-10,
            atol=1e-12,
            max_step=math.pi / 8.0,
        )
        w_direct = sol.y[:, -1]
        w_pkg = run.w_at(S0).coeffs
        assert np.max(np.abs(w_direct - w_pkg)) <= 1e-8

    def test_sample_states_carry_lens_phase(self):
        run = construct_remainder(30.0, S0, n_modes=24, s_grid=np.linspace(S0, 30.0, 9))
        states = run.samples
        assert len(states) == 9
        first = states[0]
        assert first.gamma == pytest.approx(-2.0 * first.s)
        np.testing.assert_allclose(first.coeffs.coeffs, run.w_at(first.s).coeffs, atol=1e-12)

    def test_spill_guard_raises_for_tiny_truncation(self):
        with pytest.raises(TruncationSpillError):
            construct_remainder(60.0, S0, n_modes=4, tol=1e-12)

    def test_range_validation(self, traj_schedule):
        with pytest.raises(ValueError, match="covers"):
            construct_remainder(5e3, S0, traj=traj_schedule[1e3], n_modes=16)


class TestPotential:
    def test_vanishes_on_resonance_zeros(self, traj_1e5_timed):
        radii = np.linspace(0.0, 8.0, 101)
        # sin(4s) = 0 at s = k pi / 4; the zero is structural (beta carries the factor)
        k = round(100.0 / (math.pi / 4.0))
        s_zero = k * math.pi / 4.0
        t = float(traj_1e5_timed.t_of_s(s_zero))
        sample = potential_field(traj_1e5_timed, t, radii)
        scale = abs(alpha_const()) / (s_zero * math.log(s_zero))
        assert np.max(np.abs(sample.values)) <= 1e-9 * scale

    def test_l2_norm_closed_form_vs_grid(self, traj_1e5_timed):
        radii = np.linspace(0.0, 40.0, 4001)
        t = float(traj_1e5_timed.t_of_s(333.0))
        sample = potential_field(traj_1e5_timed, t, radii)
        assert grid_l2_norm(radii, sample.values) == pytest.approx(sample.l2_norm, abs=1e-8)

    def test_values_real_and_profile_shape(self, traj_1e5_timed):
        radii = np.linspace(0.0, 8.0, 51)
        t = float(traj_1e5_timed.t_of_s(100.0))
        sample = potential_field(traj_1e5_timed, t, radii)
        assert sample.values.dtype.kind == "f"
        # Gaussian profile: maximum at the origin
        assert np.argmax(np.abs(sample.values)) in (0, 50)

    def test_decays_along_trajectory(self, traj_1e5_timed):
        s_grid = np.geomspace(21.0, 9.5e4, 300)
        t_grid = np.asarray(traj_1e5_timed.t_of_s(s_grid), dtype=float)
        radii = np.linspace(0.0, 8.0, 33)
        norms = np.array(
            [potential_field(traj_1e5_timed, float(t), radii).l2_norm for t in t_grid]
        )
        early = norms[s_grid <= 200.0].max()
        late = norms[-1]
        assert late <= 1e-3 * early


class TestReconstruction:
    radii = np.linspace(0.0, 16.0, 1601)

    def test_pure_bubble_at_terminal_time(self, traj_1e5_timed, pde_base):
        # w(M) = 0, so u is exactly the lens image of h_0
        s = pde_base.M
        t = float(traj_1e5_timed.t_of_s(s))
        u = reconstruct_u(traj_1e5_timed, pde_base, t, self.radii)
        frame = traj_1e5_timed.frame_at(s)
        y = self.radii / frame.L
        expected = (
            np.exp(-2j * s - 0.25j * frame.b * y**2)
            * (np.exp(-(y**2) / 2.0) / SQRT_PI)
            / frame.L
        )
        np.testing.assert_allclose(u, expected, atol=1e-12)

    def test_mass_equals_renormalized_mass(self, traj_1e5_timed, pde_base):
        s = 400.0
        t = float(traj_1e5_timed.t_of_s(s))
        u = reconstruct_u(traj_1e5_timed, pde_base, t, self.radii)
        v_mass = pde_base.v_at(s).l2_norm()
        assert grid_l2_norm(self.radii, u) == pytest.approx(v_mass, abs=1e-8)

    def test_exact_h1_matches_grid(self, traj_1e5_timed, pde_base):
        s = 200.0
        t = float(traj_1e5_timed.t_of_s(s))
        frame = traj_1e5_timed.frame_at(s)
        u = reconstruct_u(traj_1e5_timed, pde_base, t, self.radii)
        exact = u_h1_norm_sq(pde_base.v_at(s), frame.L, frame.b)
        assert grid_h1_norm_sq(self.radii, u) == pytest.approx(exact, rel=1e-6)

    def test_h1_of_pure_bubble_is_energy(self):
        h0 = RadialState.basis_state(0, 4)
        for L, b in ((1.0, 0.0), (2.0, 0.0), (0.7, 3.0)):
            expected = L**2 + (1.0 + b**2 / 4.0) / L**2
            assert u_h1_norm_sq(h0, L, b) == pytest.approx(expected, rel=1e-14)


class TestGrowthSeries:
    def test_early_time_sanity(self, traj_1e5_timed, pde_base):
        s = S0 * 1.5
        t = float(traj_1e5_timed.t_of_s(s))
        series = measure_growth(traj_1e5_timed, pde_base, np.array([t]))
        frame = traj_1e5_timed.frame_at(s)
        e_val = frame.ell * frame.b**2 + 4 * frame.ell + 1 / (4 * frame.ell)
        assert series.h1_norm_sq[0] == pytest.approx(e_val, abs=0.1)

    def test_identity_with_action(self, traj_1e5_timed, pde_growth):
        anchors = pde_growth.s[(pde_growth.s >= 1e3) & (pde_growth.s <= 2e3)][::8]
        t_samples = np.asarray(traj_1e5_timed.t_of_s(anchors), dtype=float)
        series = measure_growth(traj_1e5_timed, pde_growth, t_samples)
        gap = np.abs(series.h1_norm_sq - series.four_a)
        assert gap.max() <= 0.05

    def test_remainder_column_tracks_w(self, traj_1e5_timed, pde_base):
        s = 333.0
        t = float(traj_1e5_timed.t_of_s(s))
        series = measure_growth(traj_1e5_timed, pde_base, np.array([t]))
        assert series.remainder_h1[0] == pytest.approx(
            sobolev_norm(pde_base.w_at(s), 1.0), rel=1e-9
        )

    def test_times_must_increase(self, traj_1e5_timed, pde_base):
        t1 = float(traj_1e5_timed.t_of_s(100.0))
        with pytest.raises(ValueError, match="strictly increasing"):
            measure_growth(traj_1e5_timed, pde_base, np.array([t1, t1]))
