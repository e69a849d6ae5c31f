import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from thermolab.errors import ImaginarySpeed, InadmissibleProfile, NoClosedForm, NoConnection
from thermolab.grid import Grid, quadrature_norm
from thermolab.model import PhysParams, WaveSpec
from thermolab.wave import (
    build_profile,
    profile_hamiltonian,
    profile_rhs,
    reduced_cubic,
    sample_background,
    tanh_compatibility,
    tanh_reference,
)

P = PhysParams(epsilon=1.0, delta=1.0, kappa=1.0, gamma=0.25, theta0=1.0)
S = math.sqrt(0.75)
SYM = WaveSpec(-0.5, 0.5, S)
HALF = WaveSpec(0.0, 0.5, S)


@pytest.fixture(scope="module")
def half_profile():
    return build_profile(HALF, P)


class TestProfileRhs:
    def test_end_states_are_fixed_points(self):
        assert profile_rhs(-0.5, 0.0, SYM, P) == 0.0
        assert profile_rhs(0.5, 0.0, SYM, P) == pytest.approx(0.0, abs=1e-15)

    def test_middle_root(self):
        assert profile_rhs(0.0, 0.0, SYM, P) == pytest.approx(0.0, abs=1e-15)

    def test_reduced_cubic_roots(self):
        for w in (-0.5, 0.0, 0.5):
            assert reduced_cubic(w, SYM) == pytest.approx(0.0, abs=1e-15)


class TestSymmetricKink:
    # The outer roots of the reduced cubic are both nodes/foci of the profile
    # ODE, and the dissipated energy delta*w'^2/2 - G(w) takes equal values at
    # +-0.5, so no heteroclinic with damping epsilon*s != 0 joins them.
    @pytest.mark.parametrize("sign", [1, -1])
    def test_no_connection(self, sign):
        with pytest.raises(NoConnection):
            build_profile(WaveSpec(-0.5, 0.5, sign * S), P)

    def test_tanh_compatibility_frozen(self):
        # symbolic substitution of a*tanh(k*xi): k**2 = -1/8, epsilon*s = 0
        k2, eps_s = tanh_compatibility(1.0, 0.5)
        assert k2 == pytest.approx(-0.125, abs=1e-15)
        assert eps_s == 0.0

    def test_tanh_reference_has_no_real_width(self):
        with pytest.raises(NoClosedForm):
            tanh_reference(P, -0.5, 0.5)


class TestConstantProfile:
    def test_degenerate(self):
        prof = build_profile(WaveSpec.constant(0.2), P)
        assert prof.M_U == pytest.approx(0.2)
        assert prof.K_W == 0.0 and prof.K_S0 == 0.0
        w, wp = prof.evaluate(np.linspace(-5, 5, 7))
        np.testing.assert_array_equal(w, 0.2)
        np.testing.assert_array_equal(wp, 0.0)

    def test_background_vanishes(self):
        g = Grid(5.0, 31)
        bg = sample_background(build_profile(WaveSpec.constant(0.2), P), g, 3.0)
        assert not bg.W.any() and not bg.S0.any()


class TestTravelingProfile:
    def test_residual_and_phase(self, half_profile):
        assert half_profile.residual < 1e-6
        w0, _ = half_profile.evaluate(np.array([0.0]))
        assert w0[0] == pytest.approx(0.25, abs=1e-9)

    def test_tails(self, half_profile):
        assert abs(half_profile.w[0]) < 1e-8 and abs(half_profile.w[-1] - 0.5) < 1e-8
        assert abs(half_profile.w_prime[0]) < 1e-8 and abs(half_profile.w_prime[-1]) < 1e-8

    def test_admissible(self, half_profile):
        assert half_profile.admissible
        assert 3 * half_profile.M_U**2 < 1

    def test_dissipation_identity(self, half_profile):
        # epsilon*s*int(w'^2) = G(u+) - G(u-) with G(w) = w^2/8 - w^4/4
        h = half_profile.xi[1] - half_profile.xi[0]
        lhs = P.epsilon * S * h * np.sum(half_profile.w_prime**2)
        assert lhs == pytest.approx(0.5**2 / 8 - 0.5**4 / 4, rel=1e-6)

    def test_max_against_independent_integration(self, half_profile):
        # unstable manifold of the saddle at 0 integrated with a different method
        lam = (-P.epsilon * S + math.sqrt((P.epsilon * S) ** 2 + 4 * P.delta * 0.25)) / (2 * P.delta)
        eta = 1e-7
        sol = solve_ivp(
            lambda _, y: [y[1], (0.25 * y[0] - y[0] ** 3 - P.epsilon * S * y[1]) / P.delta],
            (0, 200), [eta, eta * lam], method="Radau", rtol=1e-11, atol=1e-14, dense_output=True,
        )
        tt = np.linspace(0, 200, 400001)
        assert half_profile.M_U == pytest.approx(np.max(sol.sol(tt)[0]), abs=1e-7)
        assert half_profile.M_U == pytest.approx(0.50939, abs=1e-5)

    def test_constants(self, half_profile):
        assert half_profile.K_W == pytest.approx(S * np.max(np.abs(half_profile.w_prime)))
        assert half_profile.K_W == pytest.approx(0.04604, abs=1e-5)
        assert half_profile.K_S0 == pytest.approx(0.03350, abs=1e-5)

    def test_step_size_independence(self, half_profile):
        fine = build_profile(HALF, P, step=0.005)
        xi = np.linspace(-40, 40, 801)
        assert np.max(np.abs(fine.evaluate(xi)[0] - half_profile.evaluate(xi)[0])) < 1e-6

    def test_hamiltonian_decreases(self, half_profile):
        H = profile_hamiltonian(half_profile.w, half_profile.w_prime, HALF, P)
        assert np.all(np.diff(H) <= 1e-14)

    def test_mirror_wave_by_backward_shooting(self):
        prof = build_profile(WaveSpec(-0.5, 0.0, -S), P)
        assert prof.residual < 1e-6
        assert prof.w[0] == pytest.approx(-0.5, abs=1e-8) and prof.w[-1] == pytest.approx(0.0, abs=1e-8)

    def test_wrong_speed_sign(self):
        with pytest.raises(NoConnection):
            build_profile(WaveSpec(0.0, 0.5, -S), P)

    def test_rh_violation(self):
        with pytest.raises(NoConnection):
            build_profile(WaveSpec(0.0, 0.5, 0.8), P)

    def test_inadmissible(self):
        # the outer root 1/sqrt(3) < 0.6 lies in the spinodal band
        with pytest.raises((InadmissibleProfile, NoConnection, ImaginarySpeed)):
            build_profile(WaveSpec.from_end_states(0.0, 0.6), P)


class TestBackground:
    def test_translation(self, half_profile):
        g = Grid(80.0, 1599)
        shift = g.dx / S
        a = sample_background(half_profile, g, 0.0)
        b = sample_background(half_profile, g, shift)
        np.testing.assert_allclose(b.uprime[1:], a.uprime[:-1], atol=1e-10)
        np.testing.assert_allclose(b.S0[1:], a.S0[:-1], atol=1e-10)

    def test_source_norms_time_independent(self, half_profile):
        g = Grid(90.0, 1801)
        norms = [
            (quadrature_norm(bg.S0, 1, g), quadrature_norm(bg.S0, 2, g))
            for bg in (sample_background(half_profile, g, t) for t in (0.0, 1.0, 2.0))
        ]
        for l1, l2 in norms[1:]:
            assert l1 == pytest.approx(norms[0][0], rel=1e-3)
            assert l2 == pytest.approx(norms[0][1], rel=1e-3)

    def test_fields(self, half_profile):
        g = Grid(60.0, 601)
        bg = sample_background(half_profile, g, 0.5)
        np.testing.assert_allclose(bg.W, -S * bg.usecond)
        np.testing.assert_allclose(bg.S0, S * S * bg.usecond**2 + 0.25 * S * bg.usecond)
