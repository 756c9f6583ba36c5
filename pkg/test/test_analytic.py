import numpy as np
import pytest

from zetapulse import (
    ControlProblem,
    DivergenceError,
    DomainError,
    EnvelopeSignError,
    InvalidEnvelopeError,
    Phase,
    SquareRootDomainError,
    Term,
    ZetaSeries,
    boundary_gate,
    delta_from_zeta,
    gate_fidelity,
    j_from_zeta,
    landau_zener_return,
    omega_prime_from_zeta,
    phase_aligned_distance,
    printed_elements,
    propagator_xy,
    propagator_z,
    pulse_area,
    transformed_hamiltonian,
    xi_integrals,
)
from zetapulse.analytic import frame_hamiltonian, propagator_z_trace, rotate_frame_ur, xi_trace
from zetapulse.controls import Envelope
from zetapulse.quadrature import integrate
from zetapulse.unitary import HADAMARD, IDENTITY

NOT_SERIES = ZetaSeries(np.pi / 4, 0.69, (Term(3, -0.38, 1),))
XY_SERIES = ZetaSeries(np.pi / 8, 0.66, (Term(1, 0.26, 1),))
SMOOTH = ZetaSeries(0.6, 1.0, (Term(2, 0.2, 1), Term(3, -0.1, 2)))


def xy_problem():
    return ControlProblem.sigma_xy(2 * np.pi, 0.66, Phase(amplitude=1.0))


def landau_zener_series(eps):
    return ZetaSeries(eps, 1.0, (Term(2, np.pi / 4 - eps, 1),))


class TestSynthesis:
    def test_rabi_detuning_vanishes(self):
        problem = ControlProblem.sigma_z(2 * np.pi, 1.0)
        t = np.linspace(0.0, 1.0, 11)
        np.testing.assert_allclose(delta_from_zeta(ZetaSeries.constant(np.pi / 4, 1.0), problem, t), 0.0, atol=1e-12)

    def test_square_pulse_sigma_z(self):
        problem = ControlProblem.sigma_z(2 * np.pi, 1.0)
        delta = delta_from_zeta(ZetaSeries.constant(np.pi / 6, 1.0), problem, 0.4)
        assert delta == pytest.approx(-2 * np.pi / np.sqrt(3), rel=1e-12)

    def test_square_pulse_individual(self):
        """
        constant zeta = pi/6 under the detuned drive needs Omega = Delta / sqrt(3)
        """
        delta = 2 * np.pi
        problem = ControlProblem.sigma_xy(delta, 0.5)
        omega = omega_prime_from_zeta(ZetaSeries.constant(np.pi / 6, 0.5), problem, np.linspace(0.0, 0.5, 21))
        np.testing.assert_allclose(omega, delta / np.sqrt(3), rtol=1e-9)

    def test_scalar_and_vector(self):
        problem = ControlProblem.sigma_z(2 * np.pi, 0.69)
        t = np.linspace(0.0, 0.69, 5)
        vector = delta_from_zeta(NOT_SERIES, problem, t)
        assert isinstance(delta_from_zeta(NOT_SERIES, problem, 0.2), float)
        assert vector.shape == (5,)
        assert vector[2] == pytest.approx(delta_from_zeta(NOT_SERIES, problem, t[2]), rel=1e-13)

    def test_phase_rate_shifts_detuning(self):
        plain = ControlProblem.sigma_z(2 * np.pi, 0.69)
        driven = ControlProblem.sigma_z(2 * np.pi, 0.69, Phase(amplitude=0.5))
        t = np.linspace(0.0, 0.69, 7)
        shift = delta_from_zeta(NOT_SERIES, driven, t) - delta_from_zeta(NOT_SERIES, plain, t)
        np.testing.assert_allclose(shift, 0.5 * driven.phi_dot(t), atol=1e-12)

    def test_singlet_triplet_specialization(self):
        """
        J(t) is the sigma-z detuning with Omega = h and phi = 0, exactly
        """
        rng = np.random.default_rng(11)
        h = 2 * np.pi
        for _ in range(50):
            T = rng.uniform(0.6, 1.2)
            series = ZetaSeries(rng.uniform(0.5, 1.0), T, (Term(3, rng.uniform(-0.2, 0.2), 1),))
            t = rng.uniform(0.0, T, 20)
            problem = ControlProblem.sigma_z(Envelope.constant(h), T)
            assert np.array_equal(j_from_zeta(series, h, t), delta_from_zeta(series, problem, t))

    def test_nonpositive_omega(self):
        problem = ControlProblem.sigma_z(Envelope.sine(1.0, -2.0), 1.0)
        with pytest.raises(InvalidEnvelopeError):
            delta_from_zeta(ZetaSeries.constant(np.pi / 4, 1.0), problem, np.linspace(0.0, 1.0, 11))

    def test_divergence(self):
        problem = ControlProblem.sigma_z(2 * np.pi, 1.0)
        with pytest.raises(DivergenceError) as info:
            delta_from_zeta(ZetaSeries.constant(5e-4, 1.0), problem, 0.3)
        assert info.value.t == pytest.approx(0.3)

    def test_square_root_domain(self):
        problem = ControlProblem.sigma_z(1.0, 0.1)
        with pytest.raises(SquareRootDomainError):
            delta_from_zeta(ZetaSeries(np.pi / 4, 0.1, (Term(1, 0.1, 1),)), problem, 0.0)

    def test_envelope_sign_change(self):
        """
        Delta'' = -Delta' + phi_dot / 2 crosses zero when the phase sweeps fast enough
        """
        problem = ControlProblem.sigma_xy(1.0, 1.0, Phase(amplitude=1.0))
        with pytest.raises(EnvelopeSignError):
            omega_prime_from_zeta(ZetaSeries.constant(np.pi / 4, 1.0), problem, np.linspace(0.0, 1.0, 11))

    def test_wrong_axis_and_duration(self):
        with pytest.raises(DomainError):
            delta_from_zeta(NOT_SERIES, xy_problem(), 0.1)
        with pytest.raises(DomainError):
            delta_from_zeta(NOT_SERIES, ControlProblem.sigma_z(2 * np.pi, 0.7), 0.1)


class TestXi:
    def test_rabi(self):
        problem = ControlProblem.sigma_z(2 * np.pi, 1.0)
        xi = xi_integrals(ZetaSeries.constant(np.pi / 4, 1.0), problem, 0.3)
        assert xi.xi_plus == pytest.approx(2 * np.pi * 0.3, abs=1e-10)
        assert xi.xi_minus == pytest.approx(xi.xi_plus, abs=1e-15)

    def test_not_phase(self):
        """
        the NOT pulse accumulates xi_+ close to 3 pi / 2, a NOT up to phases
        """
        xi = xi_integrals(NOT_SERIES, ControlProblem.sigma_z(2 * np.pi, 0.69), 0.69)
        assert xi.xi_plus == pytest.approx(1.5 * np.pi, abs=0.02)

    def test_trace_matches_pointwise(self):
        problem = xy_problem()
        grid = np.linspace(0.0, 0.66, 12)
        minus, plus = xi_trace(XY_SERIES, problem, grid)
        end = xi_integrals(XY_SERIES, problem, 0.66)
        assert plus[-1] == pytest.approx(end.xi_plus, abs=1e-9)
        assert minus[-1] == pytest.approx(end.xi_minus, abs=1e-9)
        assert plus[0] - minus[0] == pytest.approx(np.arcsin(0.26 * np.pi / 0.66 / problem.effective_envelope(0.0)))

    def test_trace_must_start_at_zero(self):
        with pytest.raises(DomainError):
            xi_trace(XY_SERIES, xy_problem(), [0.1, 0.2])


class TestPropagatorZ:
    def test_rabi_populations(self):
        """
        constant zeta = pi/4 gives Rabi oscillations cos^2 / sin^2 of the pulse area at 100 times
        """
        omega = 2 * np.pi
        problem = ControlProblem.sigma_z(omega, 1.0)
        grid = np.linspace(0.0, 1.0, 100)
        u = propagator_z_trace(ZetaSeries.constant(np.pi / 4, 1.0), problem, grid)
        np.testing.assert_allclose(np.abs(u[:, 0, 0]) ** 2, np.cos(omega * grid) ** 2, atol=1e-9)
        np.testing.assert_allclose(np.abs(u[:, 1, 0]) ** 2, np.sin(omega * grid) ** 2, atol=1e-9)

    def test_identity_at_zero(self):
        problem = ControlProblem.sigma_z(2 * np.pi, 0.69)
        assert propagator_z(NOT_SERIES, problem, 0.0).matrix.tolist() == IDENTITY.tolist()
        assert propagator_z_trace(NOT_SERIES, problem, [0.0, 0.3])[0].tolist() == IDENTITY.tolist()

    def test_gauge_independence(self):
        """
        the free constant theta cancels in U(t)
        """
        problem = ControlProblem.sigma_z(Envelope.sine(2 * np.pi, 1.0, 2), 0.69, Phase(offset=0.3, amplitude=0.4))
        reference = propagator_z(NOT_SERIES, problem, 0.5)
        for theta in np.random.default_rng(5).uniform(-np.pi, np.pi, 8):
            u = propagator_z(NOT_SERIES, problem, 0.5, theta=theta)
            assert np.linalg.norm(u.matrix - reference.matrix) < 1e-12

    def test_boundary_gate(self):
        problem = ControlProblem.sigma_z(2 * np.pi, 1.0)
        xi = xi_integrals(SMOOTH, problem, 1.0).xi_plus
        u = propagator_z(SMOOTH, problem, 1.0)
        assert phase_aligned_distance(u, boundary_gate(0.6, xi)) < 1e-12
        assert np.linalg.norm(u.matrix - boundary_gate(0.6, xi).matrix) < 1e-12

    def test_printed_elements_are_minus_transpose(self):
        """
        the element-wise formula equals -U^T when zeta_dot vanishes at both ends and phi = 0
        """
        problem = ControlProblem.sigma_z(2 * np.pi, 1.0)
        u = propagator_z(SMOOTH, problem, 1.0).matrix
        np.testing.assert_allclose(printed_elements(SMOOTH, problem, 1.0), -u.T, atol=1e-12)

    def test_printed_elements_rabi_is_minus_u(self):
        problem = ControlProblem.sigma_z(2 * np.pi, 1.0)
        series = ZetaSeries.constant(np.pi / 4, 1.0)
        u = propagator_z(series, problem, 0.37).matrix
        np.testing.assert_allclose(printed_elements(series, problem, 0.37), -u, atol=1e-12)

    def test_su2(self):
        problem = ControlProblem.sigma_z(2 * np.pi, 0.69, Phase(amplitude=0.7))
        assert propagator_z(NOT_SERIES, problem, 0.69).is_su2_form(1e-10)


class TestLandauZener:
    def test_closed_form_matches_propagator(self):
        problem = ControlProblem.sigma_z(2 * np.pi, 1.0)
        for eps in (0.1, 0.05, 0.02):
            series = landau_zener_series(eps)
            u = propagator_z(series, problem, 1.0)
            assert landau_zener_return(series, problem) == pytest.approx(abs(u.u11) ** 2, abs=1e-10)

    def test_bound_and_limit(self):
        """
        at T = 1 the return probability rises monotonically toward 1 as eps shrinks
        """
        problem = ControlProblem.sigma_z(2 * np.pi, 1.0)
        eps = (0.1, 0.05, 0.02)
        p = [landau_zener_return(landau_zener_series(e), problem) for e in eps]
        assert p == sorted(p)
        for e, value in zip(eps, p):
            assert np.cos(2 * e) ** 2 - 1e-12 <= value <= 1 + 1e-12
        assert p[-1] > 0.99

    def test_needs_flat_ends(self):
        with pytest.raises(DomainError):
            landau_zener_return(XY_SERIES, ControlProblem.sigma_z(2 * np.pi, 0.66))


class TestSigmaXY:
    def test_frame_hamiltonian_identity(self):
        """
        U_R^dagger H_xy U_R + i dU_R^dagger/dt U_R has Omega' + phi_dot/2 on the diagonal and Delta'' as drive
        """
        problem = xy_problem()
        t = np.linspace(0.0, 0.66, 9)
        omega = omega_prime_from_zeta(XY_SERIES, problem, t)
        np.testing.assert_allclose(
            transformed_hamiltonian(problem, omega, t), frame_hamiltonian(problem, omega, t), atol=1e-12
        )

    def test_frame_rotation_rate(self):
        """
        the closed-form frame derivative agrees with finite differences
        """
        problem = xy_problem()
        t, eps = 0.2, 1e-6
        ur = rotate_frame_ur(float(problem.phi(t))).matrix
        plus = rotate_frame_ur(float(problem.phi(t + eps))).matrix.conj().T
        minus = rotate_frame_ur(float(problem.phi(t - eps))).matrix.conj().T
        kinetic = 1j * (plus - minus) / (2 * eps) @ ur
        h_xy = np.diag([2 * np.pi, -2 * np.pi])
        expected = kinetic + ur.conj().T @ h_xy @ ur
        np.testing.assert_allclose(transformed_hamiltonian(problem, 0.0, t), expected, atol=1e-6)

    def test_hadamard(self):
        """
        zeta = pi/8 + 0.26 sin^3(pi t/T) under phi = sin(2 pi t/T) gives a Hadamard at T = 0.66
        """
        series = ZetaSeries(np.pi / 8, 0.66, (Term(3, 0.26, 1),))
        assert gate_fidelity(propagator_xy(series, xy_problem(), 0.66), HADAMARD).value >= 0.999

    def test_identity_at_zero(self):
        assert propagator_xy(XY_SERIES, xy_problem(), 0.0).matrix.tolist() == IDENTITY.tolist()

    def test_printed_amplitude_differs(self):
        problem = xy_problem()
        t = np.linspace(0.0, 0.66, 5)
        gap = omega_prime_from_zeta(XY_SERIES, problem, t) - omega_prime_from_zeta(XY_SERIES, problem, t, as_printed=True)
        np.testing.assert_allclose(gap, 0.5 * problem.phi_dot(t), atol=1e-12)


class TestPulseArea:
    def test_sigma_z_matches_quadrature(self):
        problem = ControlProblem.sigma_z(Envelope.sine(2 * np.pi, 1.0, 1), 0.69, Phase(amplitude=0.3))
        direct = integrate(lambda t: delta_from_zeta(NOT_SERIES, problem, t), 0.0, 0.69)
        assert pulse_area(NOT_SERIES, problem) == pytest.approx(direct, abs=1e-8)

    def test_sigma_xy_matches_quadrature(self):
        problem = xy_problem()
        direct = integrate(lambda t: omega_prime_from_zeta(XY_SERIES, problem, t), 0.0, 0.66)
        assert pulse_area(XY_SERIES, problem) == pytest.approx(direct, abs=1e-8)

    def test_square_pulse(self):
        delta = 2 * np.pi
        T = np.sqrt(3) * np.pi / (2 * delta)
        problem = ControlProblem.sigma_xy(delta, T)
        assert pulse_area(ZetaSeries.constant(np.pi / 6, T), problem) == pytest.approx(np.pi / 2, abs=1e-12)
