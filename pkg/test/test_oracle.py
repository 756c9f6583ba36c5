import numpy as np
import pytest
from scipy.linalg import expm

from zetapulse import (
    ContractViolation,
    ControlProblem,
    DomainError,
    HamiltonianSampler,
    Phase,
    Term,
    ZetaSeries,
    check_admissible,
    evolve_state,
    phase_aligned_distance,
    propagate_converged,
    propagate_numeric,
    propagator_xy,
    propagator_z,
)
from zetapulse.analytic import drive_matrix
from zetapulse.controls import Envelope
from zetapulse.oracle import (
    detuned_sampler,
    ordered_product,
    resonant_sampler,
    sigma_xy_sampler,
    sigma_z_sampler,
    static_sampler,
    table_sampler,
)

NOT_SERIES = ZetaSeries(np.pi / 4, 0.69, (Term(3, -0.38, 1),))
XY_SERIES = ZetaSeries(np.pi / 8, 0.66, (Term(1, 0.26, 1),))


def constant(value):
    return lambda t: np.full(np.shape(t), float(value))


class TestOrderedProduct:
    def test_matches_sequential(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(7, 2, 2)) + 1j * rng.normal(size=(7, 2, 2))
        expected = np.eye(2, dtype=complex)
        for m in a:
            expected = m @ expected
        np.testing.assert_allclose(ordered_product(a), expected, rtol=1e-12)

    def test_single(self):
        m = np.array([[0, 1j], [1j, 0]])
        np.testing.assert_allclose(ordered_product(m[None]), m)


class TestPropagate:
    def test_static_matches_scipy(self):
        """
        a constant Hamiltonian is integrated exactly by midpoint exponentials
        """
        h = drive_matrix(1.3, 2.1, 0.4)
        result = propagate_numeric(static_sampler(h, 0.8), 0.8, steps=64)
        np.testing.assert_allclose(result.U.matrix, expm(-1j * h * 0.8), atol=1e-12)
        assert result.step_doubling_defect < 1e-12

    def test_detuned_constant_drive(self):
        h = detuned_sampler(constant(2.0), 1.5, Phase(offset=0.7), 1.0)
        result = propagate_numeric(h, 1.0, steps=32)
        np.testing.assert_allclose(result.U.matrix, expm(-1j * drive_matrix(1.5, 2.0, 0.7)), atol=1e-12)

    def test_composition(self):
        """
        U(0, T) = U(T/2, T) U(0, T/2)
        """
        problem = ControlProblem.sigma_z(2 * np.pi, 0.69, Phase(amplitude=0.3))
        h = sigma_z_sampler(NOT_SERIES, problem)
        whole = propagate_numeric(h, 0.69, steps=4096).U.matrix
        first = propagate_numeric(h, 0.345, steps=2048).U.matrix
        second = propagate_numeric(h, 0.69, steps=2048, t_start=0.345).U.matrix
        np.testing.assert_allclose(second @ first, whole, atol=1e-12)

    def test_second_order(self):
        """
        halving dt cuts the error about fourfold
        """
        problem = ControlProblem.sigma_z(2 * np.pi, 0.69, Phase(amplitude=0.3))
        h = sigma_z_sampler(NOT_SERIES, problem)
        exact = propagator_z(NOT_SERIES, problem, 0.69).matrix
        errors = [np.linalg.norm(propagate_numeric(h, 0.69, steps=n).U.matrix - exact) for n in (256, 512, 1024)]
        assert errors[0] > 1e-7
        for coarse, fine in zip(errors, errors[1:]):
            assert 3.5 < coarse / fine < 4.5

    def test_converged_reports_steps(self):
        h = sigma_z_sampler(NOT_SERIES, ControlProblem.sigma_z(2 * np.pi, 0.69))
        result = propagate_converged(h, 0.69, target=1e-8, steps=256)
        assert result.step_doubling_defect < 1e-8
        assert result.steps > 256
        assert result.U.defect < 1e-12

    def test_non_hermitian(self):
        bad = HamiltonianSampler(lambda t: np.broadcast_to(np.array([[0, 1], [0, 0]]), np.shape(t) + (2, 2)), 1.0)
        with pytest.raises(ContractViolation):
            propagate_numeric(bad, 1.0, steps=16)

    def test_window(self):
        h = static_sampler(np.zeros((2, 2)), 1.0)
        with pytest.raises(DomainError):
            propagate_numeric(h, 1.5)
        with pytest.raises(DomainError):
            propagate_numeric(h, 0.5, t_start=0.7)
        with pytest.raises(DomainError):
            propagate_numeric(h, 1.0, steps=8)

    def test_result_to_dict(self):
        result = propagate_numeric(static_sampler(np.zeros((2, 2)), 1.0), 1.0, steps=16)
        assert result.to_dict() == {
            "U": {"re": [[1.0, 0.0], [0.0, 1.0]], "im": [[0.0, 0.0], [0.0, 0.0]]},
            "steps": 16,
            "step_doubling_defect": 0.0,
        }


class TestAgainstAnalytic:
    def test_random_sigma_z(self):
        """
        closed-form U(T) and brute-force propagation agree on admissible random pulses
        """
        rng = np.random.default_rng(42)
        for _ in range(5):
            T = rng.uniform(0.6, 1.2)
            series = ZetaSeries(rng.uniform(0.6, 1.0), T, (Term(2, rng.uniform(-0.15, 0.15), 1),))
            problem = ControlProblem.sigma_z(Envelope.sine(2 * np.pi, 1.0, 2), T, Phase(amplitude=rng.uniform(0, 0.5)))
            assert check_admissible(series, 2 * np.pi - 1.0).admissible
            numeric = propagate_converged(sigma_z_sampler(series, problem), T, target=1e-9)
            analytic = propagator_z(series, problem, T)
            assert np.linalg.norm(numeric.U.matrix - analytic.matrix) < 1e-6

    def test_intermediate_time(self):
        problem = ControlProblem.sigma_z(2 * np.pi, 0.69)
        numeric = propagate_converged(sigma_z_sampler(NOT_SERIES, problem), 0.4, target=1e-10)
        assert np.linalg.norm(numeric.U.matrix - propagator_z(NOT_SERIES, problem, 0.4).matrix) < 1e-6

    def test_sigma_xy(self):
        """
        the sign-modulated phase drive: the corrected amplitude matches, the commonly quoted one does not
        """
        problem = ControlProblem.sigma_xy(2 * np.pi, 0.66, Phase(amplitude=1.0))
        analytic = propagator_xy(XY_SERIES, problem, 0.66)
        numeric = propagate_converged(sigma_xy_sampler(XY_SERIES, problem), 0.66, target=1e-9)
        assert np.linalg.norm(numeric.U.matrix - analytic.matrix) < 1e-6
        printed = propagate_converged(sigma_xy_sampler(XY_SERIES, problem, as_printed=True), 0.66, target=1e-9)
        assert phase_aligned_distance(printed.U, analytic) > 1e-3

    def test_wrong_axis(self):
        with pytest.raises(DomainError):
            sigma_z_sampler(XY_SERIES, ControlProblem.sigma_xy(2 * np.pi, 0.66))
        with pytest.raises(DomainError):
            sigma_xy_sampler(NOT_SERIES, ControlProblem.sigma_z(2 * np.pi, 0.69))


class TestEvolveState:
    def test_not_pulse(self):
        """
        the NOT pulse moves |0> to |1>
        """
        h = sigma_z_sampler(NOT_SERIES, ControlProblem.sigma_z(2 * np.pi, 0.69))
        trace = evolve_state(h, [1, 0], 101, target=[0, 1])
        assert trace.p1[-1] >= 0.999
        assert trace.fidelity[-1] == pytest.approx(trace.p1[-1])
        np.testing.assert_allclose(trace.p0 + trace.p1, 1.0, atol=1e-9)

    def test_rabi(self):
        omega = 2 * np.pi
        trace = evolve_state(resonant_sampler(constant(omega), Phase(), 1.0), [1, 0], 21, steps=2000)
        np.testing.assert_allclose(trace.p1, np.sin(omega * trace.t) ** 2, atol=1e-10)
        np.testing.assert_allclose(trace.fidelity, trace.p0)

    def test_frame(self):
        trace = evolve_state(static_sampler(np.zeros((2, 2)), 1.0), [0, 1], 5, steps=16)
        frame = trace.to_frame()
        assert list(frame.columns) == ["t_us", "P0", "P1", "F"]
        assert frame["t_us"].tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert frame["P1"].tolist() == [1.0] * 5

    def test_bad_arguments(self):
        h = static_sampler(np.zeros((2, 2)), 1.0)
        with pytest.raises(DomainError):
            evolve_state(h, [1, 1], 5)
        with pytest.raises(DomainError):
            evolve_state(h, [1, 0], 5, target=[1, 0, 0])
        with pytest.raises(DomainError):
            evolve_state(h, [1, 0], 1)


class TestTableSampler:
    def test_sigma_z_table(self):
        table = table_sampler([0.0, 0.5, 1.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0], [0.3, 0.3, 0.3], "sigma_z")
        assert table.T == 1.0
        np.testing.assert_allclose(table(np.array([0.1, 0.7])), np.broadcast_to(drive_matrix(1.0, 2.0, 0.3), (2, 2, 2)))

    def test_sigma_xy_table_puts_amplitude_off_diagonal(self):
        table = table_sampler([0.0, 1.0], [0.0, 4.0], [1.0, 1.0], [0.0, 0.0], "sigma_xy")
        np.testing.assert_allclose(table(0.5), drive_matrix(1.0, 2.0, 0.0))

    def test_table_from_schedule_tracks_sampler(self):
        problem = ControlProblem.sigma_z(2 * np.pi, 0.69)
        grid = np.linspace(0.0, 0.69, 4001)
        h = sigma_z_sampler(NOT_SERIES, problem)
        diag = h(grid)[:, 0, 0].real
        table = table_sampler(grid, diag, np.full(grid.shape, 2 * np.pi), np.zeros(grid.shape), "sigma_z")
        exact = propagate_numeric(h, 0.69, steps=4000).U
        interpolated = propagate_numeric(table, 0.69, steps=4000).U
        assert phase_aligned_distance(exact, interpolated) < 1e-4
