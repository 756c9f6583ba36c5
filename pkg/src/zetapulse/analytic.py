"""
Closed-form synthesis and propagation from the auxiliary function zeta(t).

Sigma-z control fixes Omega(t) > 0 and phi(t) and synthesizes the detuning

    Delta = F(Omega) + phi_dot / 2,
    F(W)  = (zeta_ddot - zeta_dot W_dot / W) / (2 W r) - W r cot(2 zeta),  r = sqrt(1 - zeta_dot^2 / W^2).

The matching evolution operator is U(t) = U0(t) U0(0)^dagger with

    U0 = Z(-(s + phi) / 2) Y(zeta) Z(I),   Z(x) = e^{i x sigma_z},  Y(x) = e^{i x sigma_y},
    I(t) = int_0^t W r csc(2 zeta) dt',    s = arcsin(zeta_dot / W),   xi_pm = I +- s / 2.

Sigma-x/y control maps onto the same machinery in the frame U_R(phi) with the signed
envelope Delta'' = -Delta' + phi_dot / 2.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .controls import Axis, ControlProblem
from .errors import DivergenceError, DomainError, EnvelopeSignError, InvalidEnvelopeError, SquareRootDomainError
from .quadrature import QUADRATURE_TOL, cumulative_simpson, integrate
from .unitary import IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z, Unitary2
from .zeta import DEFAULT_GUARD, ZetaSeries

logger = logging.getLogger(__name__)

ENDPOINT_SLOPE_TOL = 1e-9


@dataclass(frozen=True)
class XiPair:
    xi_minus: float
    xi_plus: float
    t: float

    @property
    def integral(self) -> float:
        return 0.5 * (self.xi_plus + self.xi_minus)

    def to_dict(self) -> dict:
        return {'xi_minus': self.xi_minus, 'xi_plus': self.xi_plus, 't': self.t}


@dataclass(frozen=True)
class _Local:
    zeta: np.ndarray
    zeta_dot: np.ndarray
    zeta_ddot: np.ndarray
    w: np.ndarray
    w_dot: np.ndarray
    root: np.ndarray


def _first(t: np.ndarray, mask: np.ndarray) -> float:
    return float(np.broadcast_to(t, mask.shape)[mask].flat[0])


def _local(series: ZetaSeries, problem: ControlProblem, t, guard: float = DEFAULT_GUARD) -> _Local:
    """zeta, its derivatives and the signed envelope at t, with every domain check applied."""
    if not np.isclose(series.T, problem.T, rtol=1e-12, atol=0.0):
        raise DomainError(f'series duration {series.T} differs from problem duration {problem.T}')
    t = np.asarray(t, dtype=float)
    zeta, zeta_dot, zeta_ddot = series.evaluate(t)
    w = np.broadcast_to(problem.effective_envelope(t), t.shape)
    w_dot = np.broadcast_to(problem.effective_envelope_derivative(t), t.shape)

    if problem.axis is Axis.SIGMA_Z:
        if np.any(~(w > 0)):
            bad = ~(w > 0)
            raise InvalidEnvelopeError(f'Omega must be positive, got {w[bad].flat[0]!r} at t={_first(t, bad)!r}')
    else:
        reference = np.sign(problem.effective_envelope(0.0))
        bad = np.sign(w) != reference
        if reference == 0 or np.any(bad):
            at = 0.0 if reference == 0 else _first(t, bad)
            raise EnvelopeSignError(f"Delta'' = -Delta' + phi_dot/2 vanishes or changes sign near t={at!r}")

    bad = (zeta <= guard) | (zeta >= np.pi / 2 - guard)
    if np.any(bad):
        at = _first(t, bad)
        raise DivergenceError(f'zeta={zeta[bad].flat[0]!r} within {guard} of 0 or pi/2 at t={at!r}', t=at)

    ratio = zeta_dot / w
    bad = np.abs(ratio) >= 1
    if np.any(bad):
        at = _first(t, bad)
        raise SquareRootDomainError(f'|zeta_dot| >= |envelope| at t={at!r}', t=at)

    return _Local(zeta, zeta_dot, zeta_ddot, w, w_dot, np.sqrt(1 - ratio**2))


def _controllable(loc: _Local) -> np.ndarray:
    return (loc.zeta_ddot - loc.zeta_dot * loc.w_dot / loc.w) / (2 * loc.w * loc.root) - loc.w * loc.root / np.tan(
        2 * loc.zeta
    )


def _scalar_or_array(value: np.ndarray, t):
    return float(value) if np.ndim(t) == 0 else value


def _require(problem: ControlProblem, axis: Axis):
    if problem.axis is not axis:
        raise DomainError(f'expected a {axis.value} problem, got {problem.axis.value}')


def delta_from_zeta(series: ZetaSeries, problem: ControlProblem, t, guard: float = DEFAULT_GUARD):
    """
    Detuning Delta(t) that makes zeta(t) exact under sigma-z control.

    Parameters:
    series (ZetaSeries): The auxiliary function.
    problem (ControlProblem): A sigma-z problem (fixed Omega > 0 and phi).
    t (float | np.ndarray): Time(s) in [0, T].

    Returns:
    float | np.ndarray: Delta in rad/us, shaped like t.
    """
    _require(problem, Axis.SIGMA_Z)
    loc = _local(series, problem, t, guard)
    return _scalar_or_array(_controllable(loc) + 0.5 * problem.phi_dot(t), t)


def omega_prime_from_zeta(
    series: ZetaSeries, problem: ControlProblem, t, as_printed: bool = False, guard: float = DEFAULT_GUARD
):
    """
    Drive amplitude Omega'(t) under sigma-x/y control, Delta'' = -Delta' + phi_dot / 2.

    The frame Hamiltonian carries Omega' + phi_dot / 2 on its diagonal, so the consistent
    amplitude is F(Delta''). `as_printed=True` subtracts a second phi_dot / 2, the
    commonly quoted form; the two differ whenever phi is time dependent.
    """
    _require(problem, Axis.SIGMA_XY)
    loc = _local(series, problem, t, guard)
    value = _controllable(loc)
    if as_printed:
        value = value - 0.5 * problem.phi_dot(t)
    return _scalar_or_array(value, t)


def _integrand(series: ZetaSeries, problem: ControlProblem, guard: float):
    def g(t):
        loc = _local(series, problem, t, guard)
        return loc.w * loc.root / np.sin(2 * loc.zeta)

    return g


def _slope_angle(series: ZetaSeries, problem: ControlProblem, t, guard: float) -> np.ndarray:
    loc = _local(series, problem, t, guard)
    return np.arcsin(loc.zeta_dot / loc.w)


def xi_integrals(
    series: ZetaSeries, problem: ControlProblem, t: float, tol: float = QUADRATURE_TOL, guard: float = DEFAULT_GUARD
) -> XiPair:
    """xi_pm(t) = int_0^t W r csc(2 zeta) dt' +- arcsin(zeta_dot / W) / 2."""
    integral = integrate(_integrand(series, problem, guard), 0.0, float(t), tol=tol)
    s = float(_slope_angle(series, problem, t, guard))
    return XiPair(xi_minus=integral - 0.5 * s, xi_plus=integral + 0.5 * s, t=float(t))


def xi_trace(
    series: ZetaSeries, problem: ControlProblem, grid, tol: float = QUADRATURE_TOL, guard: float = DEFAULT_GUARD
) -> tuple[np.ndarray, np.ndarray]:
    """(xi_minus, xi_plus) on a grid starting at 0."""
    grid = np.asarray(grid, dtype=float)
    if grid[0] != 0.0:
        raise DomainError('xi trace grid must start at t=0')
    integral = cumulative_simpson(_integrand(series, problem, guard), grid, tol=tol)
    s = _slope_angle(series, problem, grid, guard)
    return integral - 0.5 * s, integral + 0.5 * s


def _u0(zeta, s, integral, phi, theta: float = 0.0) -> np.ndarray:
    a = np.cos(zeta) * np.exp(1j * (integral - 0.5 * s - 0.5 * phi + theta))
    b = -np.sin(zeta) * np.exp(1j * (integral + 0.5 * s + 0.5 * phi + theta))
    out = np.empty(np.shape(a) + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = -np.conj(b)
    out[..., 1, 0] = b
    out[..., 1, 1] = np.conj(a)
    return out


def _frame_matrices(
    series: ZetaSeries, problem: ControlProblem, grid, theta: float, tol: float, guard: float
) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    xi_minus, xi_plus = xi_trace(series, problem, grid, tol=tol, guard=guard)
    integral = 0.5 * (xi_plus + xi_minus)
    s = xi_plus - xi_minus
    zeta, _, _ = series.evaluate(grid)
    u0 = _u0(zeta, s, integral, problem.phi(grid), theta)
    out = u0 @ u0[0].conj().T
    out[0] = IDENTITY
    return out


def _frame_unitary(series, problem, t, theta, tol, guard) -> Unitary2:
    t = float(t)
    if t == 0.0:
        return Unitary2.identity()
    return Unitary2.from_matrix(_frame_matrices(series, problem, [0.0, t], theta, tol, guard)[-1])


def propagator_z(
    series: ZetaSeries,
    problem: ControlProblem,
    t: float,
    theta: float = 0.0,
    tol: float = QUADRATURE_TOL,
    guard: float = DEFAULT_GUARD,
) -> Unitary2:
    """
    Closed-form U(t) = U0(t) U0(0)^dagger under sigma-z control.

    `theta` is the free constant of the solution family, applied as U0 diag(e^{i theta}, e^{-i theta});
    it cancels in U(t). U(0) is the identity exactly.
    """
    _require(problem, Axis.SIGMA_Z)
    return _frame_unitary(series, problem, t, theta, tol, guard)


def propagator_z_trace(
    series: ZetaSeries, problem: ControlProblem, grid, tol: float = QUADRATURE_TOL, guard: float = DEFAULT_GUARD
) -> np.ndarray:
    """Stacked U(t) on a grid starting at 0, shape (len(grid), 2, 2)."""
    _require(problem, Axis.SIGMA_Z)
    return _frame_matrices(series, problem, grid, 0.0, tol, guard)


def printed_elements(
    series: ZetaSeries, problem: ControlProblem, t: float, tol: float = QUADRATURE_TOL, guard: float = DEFAULT_GUARD
) -> np.ndarray:
    """
    The commonly quoted element-wise matrix, with the un-argumented xi_plus read as xi_plus(t)
    and phi read as phi(t).

    It is not the propagator: when zeta_dot vanishes at 0 and at t and phi = 0 it equals
    -U(t)^T, which coincides with -U(t) only for symmetric U.
    """
    start = xi_integrals(series, problem, 0.0, tol, guard)
    now = xi_integrals(series, problem, t, tol, guard)
    z0, _, _ = series.evaluate(0.0)
    zt, _, _ = series.evaluate(t)
    phi = float(problem.phi(t))
    c0, s0, ct, st = np.cos(z0), np.sin(z0), np.cos(zt), np.sin(zt)
    m0, p0, mt, pt = start.xi_minus, start.xi_plus, now.xi_minus, now.xi_plus
    u11 = -np.exp(0.5j * (m0 + 2 * mt - 2 * phi)) * ct * c0 - np.exp(0.5j * (p0 - 2 * pt)) * st * s0
    u12 = np.exp(-0.5j * (p0 + 2 * phi - 2 * mt)) * c0 * st - np.exp(-0.5j * (m0 + 2 * pt)) * ct * s0
    u21 = np.exp(0.5j * (m0 + 2 * pt)) * ct * s0 - np.exp(0.5j * (p0 + 2 * phi - 2 * mt)) * c0 * st
    u22 = -np.exp(-0.5j * (m0 + 2 * mt - 2 * phi)) * ct * c0 - np.exp(-0.5j * (p0 - 2 * pt)) * st * s0
    return np.array([[u11, u12], [u21, u22]], dtype=complex)


def _generator(phi):
    """M(phi) = [[0, e^{-i(phi + pi/2)}], [e^{i(phi + pi/2)}, 0]] = -sin(phi) sigma_x + cos(phi) sigma_y."""
    phi = np.asarray(phi, dtype=float)[..., None, None]
    return -np.sin(phi) * SIGMA_X + np.cos(phi) * SIGMA_Y


def _frame_rotation(phi) -> np.ndarray:
    # M is an involution, so exp(-i pi/4 M) = cos(pi/4) I - i sin(pi/4) M
    return np.cos(np.pi / 4) * IDENTITY - 1j * np.sin(np.pi / 4) * _generator(phi)


def rotate_frame_ur(phi: float) -> Unitary2:
    """U_R(phi) = exp(-i pi/4 M(phi))."""
    return Unitary2.from_matrix(_frame_rotation(phi))


def _frame_rotation_rate(phi, phi_dot) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)[..., None, None]
    d_generator = -np.cos(phi) * SIGMA_X - np.sin(phi) * SIGMA_Y
    return -1j * np.sin(np.pi / 4) * d_generator * np.asarray(phi_dot, dtype=float)[..., None, None]


def drive_matrix(detuning, amplitude, phi) -> np.ndarray:
    """Stacked [[d, r e^{-i phi}], [r e^{i phi}, -d]], Hermitian by construction."""
    detuning, amplitude, phi = np.broadcast_arrays(
        np.asarray(detuning, float), np.asarray(amplitude, float), np.asarray(phi, float)
    )
    h = np.empty(detuning.shape + (2, 2), dtype=complex)
    h[..., 0, 0] = detuning
    h[..., 1, 1] = -detuning
    h[..., 0, 1] = amplitude * np.exp(-1j * phi)
    h[..., 1, 0] = np.conj(h[..., 0, 1])
    return h


def transformed_hamiltonian(problem: ControlProblem, omega_prime, t) -> np.ndarray:
    """H' = i dU_R^dagger/dt U_R + U_R^dagger H_xy U_R, evaluated from the closed-form dU_R/dt."""
    _require(problem, Axis.SIGMA_XY)
    phi, phi_dot = problem.phi(t), problem.phi_dot(t)
    ur = _frame_rotation(phi)
    ur_dot = _frame_rotation_rate(phi, phi_dot)
    h_xy = drive_matrix(problem.fixed(t), omega_prime, phi)
    ur_dag = np.swapaxes(ur.conj(), -1, -2)
    ur_dot_dag = np.swapaxes(ur_dot.conj(), -1, -2)
    return 1j * ur_dot_dag @ ur + ur_dag @ h_xy @ ur


def frame_hamiltonian(problem: ControlProblem, omega_prime, t) -> np.ndarray:
    """The frame Hamiltonian in its sigma-z form: diagonal Omega' + phi_dot / 2, drive Delta'' e^{-i phi}."""
    _require(problem, Axis.SIGMA_XY)
    phi_dot = problem.phi_dot(t)
    return drive_matrix(np.asarray(omega_prime) + 0.5 * phi_dot, problem.effective_envelope(t), problem.phi(t))


def propagator_xy(
    series: ZetaSeries, problem: ControlProblem, t: float, tol: float = QUADRATURE_TOL, guard: float = DEFAULT_GUARD
) -> Unitary2:
    """U(t) = U_R(phi(t)) U'(t) U_R(phi(0))^dagger, U' from the sigma-z machinery with W = Delta''."""
    _require(problem, Axis.SIGMA_XY)
    t = float(t)
    if t == 0.0:
        return Unitary2.identity()
    inner = _frame_unitary(series, problem, t, 0.0, tol, guard)
    ur_t = _frame_rotation(problem.phi(t))
    ur_0 = _frame_rotation(problem.phi(0.0))
    return Unitary2.from_matrix(ur_t @ inner.matrix @ ur_0.conj().T)


def pulse_area(
    series: ZetaSeries, problem: ControlProblem, tol: float = QUADRATURE_TOL, guard: float = DEFAULT_GUARD
) -> float:
    """
    int_0^T of the synthesized controllable (Delta for sigma-z, Omega' for sigma-x/y):

        int F dt = [arcsin(zeta_dot / W)]_0^T / 2 - int W r cot(2 zeta) dt
    """

    def g(t):
        loc = _local(series, problem, t, guard)
        return loc.w * loc.root / np.tan(2 * loc.zeta)

    s = _slope_angle(series, problem, np.array([0.0, series.T]), guard)
    area = 0.5 * (s[1] - s[0]) - integrate(g, 0.0, series.T, tol=tol)
    if problem.axis is Axis.SIGMA_Z:
        area += 0.5 * float(problem.phi(series.T) - problem.phi(0.0))
    return float(area)


def boundary_gate(zeta0: float, xi: float) -> Unitary2:
    """
    Frame gate at T when zeta(0) = zeta(T) = zeta0, zeta_dot vanishes at both ends and phi = 0:

        cos(xi) I + i sin(xi) (cos(2 zeta0) sigma_z - sin(2 zeta0) sigma_x)
    """
    axis = np.cos(2 * zeta0) * SIGMA_Z - np.sin(2 * zeta0) * SIGMA_X
    return Unitary2.from_matrix(np.cos(xi) * IDENTITY + 1j * np.sin(xi) * axis)


def landau_zener_return(
    series: ZetaSeries, problem: ControlProblem, tol: float = QUADRATURE_TOL, guard: float = DEFAULT_GUARD
) -> float:
    """
    Ground-state return probability |e^{2 i xi_+} cos zeta(0) cos zeta(T) + sin zeta(0) sin zeta(T)|^2.

    Requires zeta_dot(0) = zeta_dot(T) = 0.
    """
    _, slope, _ = series.evaluate(np.array([0.0, series.T]))
    if np.any(np.abs(slope) > ENDPOINT_SLOPE_TOL):
        raise DomainError(f'zeta_dot must vanish at both ends, got {slope.tolist()}')
    xi = xi_integrals(series, problem, series.T, tol, guard).xi_plus
    z0, _, _ = series.evaluate(0.0)
    zt, _, _ = series.evaluate(series.T)
    amplitude = np.exp(2j * xi) * np.cos(z0) * np.cos(zt) + np.sin(z0) * np.sin(zt)
    return float(abs(amplitude) ** 2)
