import logging
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Literal

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from .analytic import (
    XiPair,
    boundary_gate,
    delta_from_zeta,
    omega_prime_from_zeta,
    propagator_xy,
    propagator_z,
    pulse_area,
    rotate_frame_ur,
    xi_integrals,
)
from .controls import Axis, ControlProblem, Phase
from .errors import BracketError, CalibrationError, DomainError, ZetaPulseError
from .metrics import FidelityScore, gate_fidelity, phase_aligned_distance
from .oracle import (
    PropagationResult,
    detuned_sampler,
    propagate_converged,
    resonant_sampler,
    sigma_xy_sampler,
    sigma_z_sampler,
)
from .unitary import HADAMARD, IDENTITY, NOT, S_GATE, SIGMA_X, SIGMA_Y, T_GATE, Unitary2, rx, rz
from .zeta import DEFAULT_GUARD, Term, ZetaSeries, check_admissible

logger = logging.getLogger(__name__)

ST_COUPLING = 2 * np.pi
HADAMARD_DURATION = 0.942
HADAMARD_AMPLITUDE = 0.18
HADAMARD_BRACKET = (0.12, 0.24)
PHASE_ROTATION_AMPLITUDE = 0.24
NOT_AMPLITUDE = -0.38
SLOPE_MARGIN = 0.9
CALIBRATION_TOL = 1e-6
FIDELITY_FLOOR = 0.999
DEFAULT_SAMPLES = 401
ORACLE_TARGET = 1e-9

Objective = Literal['xi_minus_at_T', 'xi_plus_at_T', 'pulse_area']


@dataclass(frozen=True, eq=False)
class PulseSchedule:
    """
    Synthesized pulse on a grid from 0 to T.

    controllable: Delta (sigma_z), J (st) or Omega' (sigma_xy, individual), rad/us
    fixed: Omega, h or Delta', rad/us
    phi: drive phase, rad
    """

    grid: np.ndarray
    controllable: np.ndarray
    fixed: np.ndarray
    phi: np.ndarray
    axis: str
    series: ZetaSeries
    problem: ControlProblem
    label: str = ''

    def __post_init__(self):
        if self.grid[0] != 0.0 or self.grid[-1] != self.series.T or np.any(np.diff(self.grid) <= 0):
            raise DomainError('schedule grid must increase strictly from 0 to T')

    @property
    def T(self) -> float:
        return self.series.T

    @property
    def boundary_residuals(self) -> tuple[float, float]:
        return float(self.controllable[0]), float(self.controllable[-1])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                't_us': self.grid,
                'controllable_rad_per_us': self.controllable,
                'envelope_rad_per_us': self.fixed,
                'phi_rad': self.phi,
            }
        )

    def to_dict(self) -> dict:
        return {
            'label': self.label,
            'axis': self.axis,
            'zeta': self.series.to_dict(),
            'problem': self.problem.to_dict(),
            'boundary_residuals': list(self.boundary_residuals),
        }


@dataclass(frozen=True)
class GateReport:
    target: Unitary2
    achieved_analytic: Unitary2
    achieved_numeric: Unitary2
    fidelity_analytic: FidelityScore
    fidelity_numeric: FidelityScore
    boundary_residuals: tuple[tuple[float, float], ...]
    xi_at_T: tuple[XiPair, ...]
    oracle_deviation: float
    oracle_defect: float
    label: str = ''

    def passes(self, floor: float = FIDELITY_FLOOR) -> bool:
        return self.fidelity_numeric.value >= floor

    def to_dict(self) -> dict:
        return {
            'label': self.label,
            'target': self.target.to_dict(),
            'achieved_analytic': self.achieved_analytic.to_dict(),
            'achieved_numeric': self.achieved_numeric.to_dict(),
            'fidelity_analytic': self.fidelity_analytic.value,
            'fidelity_numeric': self.fidelity_numeric.value,
            'boundary_residuals': [list(pair) for pair in self.boundary_residuals],
            'xi_at_T': [xi.to_dict() for xi in self.xi_at_T],
            'oracle_deviation': self.oracle_deviation,
            'oracle_defect': self.oracle_defect,
        }


def envelope_magnitude(problem: ControlProblem) -> Callable[[np.ndarray], np.ndarray]:
    return lambda t: np.abs(problem.effective_envelope(t))


def synthesize_schedule(
    series: ZetaSeries,
    problem: ControlProblem,
    samples: int = DEFAULT_SAMPLES,
    axis: str | None = None,
    label: str = '',
    guard: float = DEFAULT_GUARD,
) -> PulseSchedule:
    """Sample the synthesized controllable (Delta or Omega') on a uniform grid, after an admissibility check."""
    report = check_admissible(series, envelope_magnitude(problem), guard=guard)
    if not report.admissible:
        first = report.violations[0]
        raise DomainError(f'{label or "series"} is not admissible: {first.kind} at t={first.t}')
    grid = np.linspace(0.0, series.T, samples)
    if problem.axis is Axis.SIGMA_Z:
        controllable = delta_from_zeta(series, problem, grid, guard=guard)
    else:
        controllable = omega_prime_from_zeta(series, problem, grid, guard=guard)
    return PulseSchedule(
        grid=grid,
        controllable=np.asarray(controllable),
        fixed=problem.fixed(grid),
        phi=problem.phi(grid),
        axis=axis or problem.axis.value,
        series=series,
        problem=problem,
        label=label,
    )


def j_from_zeta(series: ZetaSeries, h: float, t):
    """
    Exchange J(t) of H_ST = h sigma_x + J sigma_z:

        J = zeta_ddot / (2 h r) - h r cot(2 zeta),  r = sqrt(1 - zeta_dot^2 / h^2)
    """
    return delta_from_zeta(series, ControlProblem.singlet_triplet(h, series.T), t)


def smooth_endpoints(series: ZetaSeries, h: float) -> ZetaSeries:
    """
    Fix the first n=2 term amplitude so that J(0) = J(T) = 0, i.e. zeta_ddot = 2 h^2 cot(2 A0) at both ends.

    Terms with n >= 3 vanish to second order at the ends; n=1 terms leave zeta_dot(0) nonzero and are rejected.
    A (2, A, 1) term is appended when the series has none and the condition is not already met.
    """
    if any(term.n == 1 and term.A != 0 for term in series.terms):
        raise DomainError('n=1 terms make zeta_dot(0) nonzero; J endpoints cannot be smoothed')
    required = 2 * h**2 / np.tan(2 * series.A0)
    index = next((i for i, term in enumerate(series.terms) if term.n == 2), None)
    if index is None:
        if abs(required) <= 1e-12 * h**2:
            return series
        series = series.with_term(Term(2, 0.0, 1))
        index = len(series.terms) - 1

    def curvature(term: Term) -> float:
        return 2 * (term.a * np.pi / series.T) ** 2

    others = sum(term.A * curvature(term) for i, term in enumerate(series.terms) if term.n == 2 and i != index)
    return series.with_amplitude(index, (required - others) / curvature(series.terms[index]))


@dataclass(frozen=True)
class Calibration:
    series: ZetaSeries
    problem: ControlProblem
    value: float
    target: float
    objective_value: float
    iterations: int

    def to_dict(self) -> dict:
        return {
            'zeta': self.series.to_dict(),
            'value': self.value,
            'target': self.target,
            'objective_value': self.objective_value,
            'iterations': self.iterations,
        }


def objective_value(series: ZetaSeries, problem: ControlProblem, objective: Objective) -> float:
    if objective == 'pulse_area':
        return pulse_area(series, problem)
    xi = xi_integrals(series, problem, series.T)
    if objective == 'xi_minus_at_T':
        return xi.xi_minus
    if objective == 'xi_plus_at_T':
        return xi.xi_plus
    raise DomainError(f'unknown objective {objective!r}')


def calibrate_scalar(
    template: ZetaSeries,
    objective: Objective,
    target: float,
    bracket: tuple[float, float],
    problem: ControlProblem,
    free: int | Literal['duration'] = 0,
    constraint: Callable[[ZetaSeries], ZetaSeries] | None = None,
    modulo: float | None = np.pi,
    tol: float = CALIBRATION_TOL,
    admissibility_samples: int = 9,
    guard: float = DEFAULT_GUARD,
) -> Calibration:
    """
    Solve objective(series) = target for one free coefficient by bracketed root finding.

    Parameters:
    template (ZetaSeries): Starting series; its current free value is the initial guess.
    objective (str): 'xi_minus_at_T', 'xi_plus_at_T' or 'pulse_area'.
    target (float): Target in radians.
    bracket (tuple): (lo, hi) for the free coefficient.
    problem (ControlProblem): Fixed envelope and phase.
    free (int | 'duration'): Index of the free term amplitude, or the duration T.
    constraint (Callable, optional): Applied to every trial series, e.g. endpoint smoothing.
    modulo (float, optional): With a period, the target is moved to the congruent value
        nearest the template's objective. None keeps the literal target.
    tol (float): Objective tolerance in radians.

    Returns:
    Calibration: The calibrated series and the iteration count.
    """
    lo, hi = sorted(map(float, bracket))

    def build(x: float) -> tuple[ZetaSeries, ControlProblem]:
        if free == 'duration':
            series, trial_problem = template.with_duration(x), problem.with_duration(x)
        else:
            series, trial_problem = template.with_amplitude(free, x), problem
        if constraint is not None:
            series = constraint(series)
        return series, trial_problem

    def evaluate(x: float) -> float:
        try:
            return objective_value(*build(x), objective)
        except DomainError as err:
            raise DomainError(f'admissibility lost at {_free_name(free)}={x!r}: {err}') from err

    x0 = template.T if free == 'duration' else template.terms[free].A
    start, start_problem = build(x0)
    v0 = objective_value(start, start_problem, objective)
    if modulo:
        target = target + modulo * np.round((v0 - target) / modulo)
    if lo <= x0 <= hi and abs(v0 - target) < tol:
        logger.debug('template already meets %s=%.9f', objective, target)
        return Calibration(start, start_problem, x0, target, v0, 0)

    for x in np.linspace(lo, hi, admissibility_samples):
        series, trial_problem = build(x)
        report = check_admissible(series, envelope_magnitude(trial_problem), guard=guard)
        if not report.admissible:
            first = report.violations[0]
            raise DomainError(f'admissibility lost at {_free_name(free)}={x!r}: {first.kind} at t={first.t}')

    f_lo, f_hi = evaluate(lo) - target, evaluate(hi) - target
    diagnostics = {
        'free': _free_name(free),
        'objective': objective,
        'target': target,
        'bracket': [lo, hi],
        'objective_at_bracket': [f_lo + target, f_hi + target],
    }
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketError(f'{objective} does not cross {target:.6f} over {_free_name(free)} in [{lo}, {hi}]', diagnostics)

    root, result = brentq(lambda x: evaluate(x) - target, lo, hi, xtol=1e-13, full_output=True)
    series, trial_problem = build(root)
    value = objective_value(series, trial_problem, objective)
    if not result.converged or abs(value - target) >= tol:
        raise CalibrationError(f'{objective} missed {target:.9f}: got {value:.9f}', {**diagnostics, 'root': root})
    logger.debug('calibrated %s=%.9f in %d iterations', _free_name(free), root, result.iterations)
    return Calibration(series, trial_problem, float(root), float(target), value, result.iterations)


def _free_name(free) -> str:
    return 'T' if free == 'duration' else f'A[{free}]'


@lru_cache(maxsize=64)
def verify_schedule(schedule: PulseSchedule) -> tuple[Unitary2, PropagationResult]:
    """Closed-form and oracle propagators of one schedule over [0, T]."""
    series, problem = schedule.series, schedule.problem
    if problem.axis is Axis.SIGMA_Z:
        analytic = propagator_z(series, problem, series.T)
        numeric = propagate_converged(sigma_z_sampler(series, problem), series.T, target=ORACLE_TARGET)
    else:
        analytic = propagator_xy(series, problem, series.T)
        numeric = propagate_converged(sigma_xy_sampler(series, problem), series.T, target=ORACLE_TARGET)
    logger.debug(
        '%s: %d oracle steps, defect %.2e, deviation %.2e',
        schedule.label,
        numeric.steps,
        numeric.step_doubling_defect,
        phase_aligned_distance(analytic, numeric.U),
    )
    return analytic, numeric


@lru_cache(maxsize=32)
def hadamard_schedule(h: float = ST_COUPLING) -> PulseSchedule:
    """Singlet-triplet Hadamard: zeta = 3pi/8 + A2 sin^2(4 pi t/T) + A3 sin^3(pi t/T), xi_+(T) = pi/2 mod pi."""
    T = HADAMARD_DURATION * ST_COUPLING / h
    problem = ControlProblem.singlet_triplet(h, T)
    template = smooth_endpoints(ZetaSeries(3 * np.pi / 8, T, (Term(2, -0.22, 4), Term(3, HADAMARD_AMPLITUDE, 1))), h)
    calibration = calibrate_scalar(
        template,
        'xi_plus_at_T',
        np.pi / 2,
        HADAMARD_BRACKET,
        problem,
        free=1,
        constraint=lambda s: smooth_endpoints(s, h),
    )
    return synthesize_schedule(calibration.series, problem, axis='st', label='H')


@lru_cache(maxsize=64)
def x_rotation_schedule(angle: float, h: float = ST_COUPLING, amplitude: float | None = None) -> PulseSchedule:
    """
    exp(-i angle/2 sigma_x) from zeta = pi/4 + A3 sin^3(pi t/T) with A3 fixed and T calibrated.

    zeta(0) = pi/4 gives exp(-i xi sigma_x) at T, so xi_+(T) = angle/2 + k pi; the smallest k whose
    duration bracket keeps the slope ratio below the margin wins.
    """
    if amplitude is None:
        amplitude = NOT_AMPLITUDE if np.isclose(abs(angle) % (2 * np.pi), np.pi) else PHASE_ROTATION_AMPLITUDE
    base = (angle / 2) % np.pi
    errors = []
    for k in range(0 if base > 1e-12 else 1, 9):
        xi = base + k * np.pi
        guess = xi / h
        lo, hi = 0.8 * guess, 1.02 * guess
        template = ZetaSeries(np.pi / 4, lo, (Term(3, amplitude, 1),))
        report = check_admissible(template, h)
        if not report.admissible or report.max_slope_ratio > SLOPE_MARGIN:
            continue
        try:
            calibration = calibrate_scalar(
                template.with_duration(guess),
                'xi_plus_at_T',
                xi,
                (lo, hi),
                ControlProblem.singlet_triplet(h, guess),
                free='duration',
                constraint=lambda s: smooth_endpoints(s, h),
                modulo=None,
            )
        except CalibrationError as err:
            errors.append(err.diagnostics)
            continue
        return synthesize_schedule(calibration.series, calibration.problem, axis='st', label=f'Rx({angle:.6g})')
    raise CalibrationError(f'no admissible duration for an x rotation by {angle}', {'attempts': errors})


GateName = Literal['H', 'S', 'T', 'NOT', 'Rx', 'Rz']


def st_gate_target(gate: GateName, angle: float | None = None) -> Unitary2:
    if gate == 'H':
        return HADAMARD
    if gate == 'S':
        return S_GATE
    if gate == 'T':
        return T_GATE
    if gate == 'NOT':
        return NOT
    if angle is None:
        raise DomainError(f'{gate} needs an angle')
    return rx(angle) if gate == 'Rx' else rz(angle)


def st_gate_schedules(gate: GateName, h: float = ST_COUPLING, angle: float | None = None) -> tuple[PulseSchedule, ...]:
    """Time-ordered schedules. Phase gates use R(sigma_z, a) = H R(sigma_x, a) H."""
    if gate == 'H':
        return (hadamard_schedule(h),)
    if gate == 'NOT':
        return (x_rotation_schedule(np.pi, h),)
    if gate == 'Rx':
        return (x_rotation_schedule(float(angle), h),)
    phase = {'S': np.pi / 2, 'T': np.pi / 4}.get(gate, angle)
    if phase is None:
        raise DomainError(f'{gate} needs an angle')
    hadamard = hadamard_schedule(h)
    return hadamard, x_rotation_schedule(float(phase), h), hadamard


def _compose(unitaries) -> Unitary2:
    total = IDENTITY
    for u in unitaries:
        total = u.matrix @ total
    return Unitary2.from_matrix(total)


def report_sequence(schedules: tuple[PulseSchedule, ...], target: Unitary2, label: str = '') -> GateReport:
    """GateReport of a time-ordered schedule sequence, one analytic and one oracle propagation per schedule."""
    runs = [verify_schedule(s) for s in schedules]
    analytic = _compose([a for a, _ in runs]) if runs else Unitary2.identity()
    numeric = _compose([n.U for _, n in runs]) if runs else Unitary2.identity()
    return GateReport(
        target=target,
        achieved_analytic=analytic,
        achieved_numeric=numeric,
        fidelity_analytic=gate_fidelity(analytic, target),
        fidelity_numeric=gate_fidelity(numeric, target),
        boundary_residuals=tuple(s.boundary_residuals for s in schedules),
        xi_at_T=tuple(xi_integrals(s.series, s.problem, s.T) for s in schedules),
        oracle_deviation=phase_aligned_distance(analytic, numeric),
        oracle_defect=max((n.step_doubling_defect for _, n in runs), default=0.0),
        label=label,
    )


def build_st_gate(
    gate: GateName, h: float = ST_COUPLING, angle: float | None = None
) -> tuple[tuple[PulseSchedule, ...], GateReport]:
    """
    Smooth singlet-triplet pulses for H, S, T, NOT or an x/z rotation, verified against the oracle.

    Every schedule has J(0) = J(T) = 0, so sequences concatenate without jumps.
    """
    if not h > 0:
        raise DomainError(f'coupling h must be positive, got {h!r}')
    schedules = st_gate_schedules(gate, h, angle)
    label = gate if angle is None else f'{gate}({angle:.6g})'
    report = report_sequence(schedules, st_gate_target(gate, angle), label)
    logger.info('%s gate: fidelity %.9f over %d schedule(s)', label, report.fidelity_numeric.value, len(schedules))
    return schedules, report


def seam_jumps(schedules) -> list[float]:
    """Controllable jumps where consecutive schedules meet."""
    return [abs(a.controllable[-1] - b.controllable[0]) for a, b in zip(schedules, schedules[1:])]


def projective_key(u: Unitary2 | np.ndarray, decimals: int = 6) -> tuple:
    """Hashable representative of u up to global phase."""
    m = u.matrix if isinstance(u, Unitary2) else np.asarray(u, dtype=complex)
    flat = m.reshape(-1)
    pivot = flat[np.flatnonzero(np.abs(flat) > 1e-6)[0]]
    m = np.round(flat * np.exp(-1j * np.angle(pivot)), decimals) + (0.0 + 0.0j)
    return tuple(zip(m.real.tolist(), m.imag.tolist()))


def projective_order(u: Unitary2, limit: int = 24) -> int:
    power = u.matrix
    for order in range(1, limit + 1):
        if projective_key(power) == projective_key(IDENTITY):
            return order
        power = power @ u.matrix
    raise DomainError(f'projective order exceeds {limit}')


@dataclass(frozen=True)
class CliffordEntry:
    word: str
    schedules: tuple[PulseSchedule, ...]
    target: Unitary2
    report: GateReport | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        out = {
            'word': self.word,
            'target': self.target.to_dict(),
            'durations_us': [s.T for s in self.schedules],
        }
        if self.report is not None:
            out['fidelity_numeric'] = self.report.fidelity_numeric.value
            out['oracle_deviation'] = self.report.oracle_deviation
        return out


def clifford_words() -> list[tuple[str, Unitary2]]:
    """Breadth-first shortest {H, S} words for the 24 single-qubit Cliffords; letters are time ordered."""
    generators = {'H': HADAMARD, 'S': S_GATE}
    found = {projective_key(IDENTITY): ('', Unitary2.identity())}
    queue = deque([('', Unitary2.identity())])
    while queue:
        word, u = queue.popleft()
        for letter, g in generators.items():
            nxt = g @ u
            key = projective_key(nxt)
            if key not in found:
                found[key] = (word + letter, nxt)
                queue.append(found[key])
    return list(found.values())


def is_closed(targets) -> bool:
    keys = {projective_key(u) for u in targets}
    return all(projective_key(a @ b) in keys for a in targets for b in targets)


def clifford_table(h: float = ST_COUPLING, verify: bool = True) -> tuple[CliffordEntry, ...]:
    """The 24 Cliffords as {H, S} words with their smooth schedule sequences."""
    words = clifford_words()
    pieces = {'H': st_gate_schedules('H', h), 'S': st_gate_schedules('S', h)}
    entries = []
    for word, target in words:
        schedules = tuple(s for letter in word for s in pieces[letter])
        report = report_sequence(schedules, target, word or 'I') if verify else None
        entries.append(CliffordEntry(word, schedules, target, report))
    if len(entries) != 24 or not is_closed([e.target for e in entries]):
        raise ZetaPulseError(f'Clifford search produced {len(entries)} non-closed classes')
    return tuple(entries)


VARIANT_BOUNDARY = {'phase_gate': np.pi / 4, 'x_rotation': np.pi / 6}


@dataclass(frozen=True)
class IndividualDesign:
    schedule: PulseSchedule
    predicted_resonant: Unitary2
    predicted_detuned: Unitary2
    resonant: GateReport
    detuned: GateReport
    area: float
    xi: float
    scan_points: int = 0

    def to_dict(self) -> dict:
        return {
            'zeta': self.schedule.series.to_dict(),
            'area': self.area,
            'xi': self.xi,
            'resonant': self.resonant.to_dict(),
            'detuned': self.detuned.to_dict(),
        }


def resonant_gate(area: float, phi: float = 0.0) -> Unitary2:
    """cos(A) I - i sin(A) (cos phi sigma_x + sin phi sigma_y)."""
    axis = np.cos(phi) * SIGMA_X + np.sin(phi) * SIGMA_Y
    return Unitary2.from_matrix(np.cos(area) * IDENTITY - 1j * np.sin(area) * axis)


def detuned_gate(xi: float, zeta0: float, phi: float = 0.0) -> Unitary2:
    """
    Detuned-subspace gate U_R(phi) Z(-phi/2) G(zeta0, xi) Z(-phi/2)^dagger U_R(phi)^dagger for a constant
    phase, Z(x) = e^{i x sigma_z}. For phi = 0:

        cos(xi) I + i sin(xi) (cos(2 zeta0) sigma_x + sin(2 zeta0) sigma_z)
    """
    frame = rotate_frame_ur(phi) @ Unitary2.from_matrix(np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)]))
    return frame @ boundary_gate(zeta0, xi) @ frame.dagger()


def _series(zeta0: float, amplitude: float, T: float) -> ZetaSeries:
    return ZetaSeries(zeta0, T, (Term(3, amplitude, 1),))


def _problem(delta: float, phi: float, T: float) -> ControlProblem:
    return ControlProblem.sigma_xy(delta, T, Phase(offset=phi))


def _duration_for_phase(zeta0: float, amplitude: float, delta: float, phi: float, xi_target: float) -> float:
    """Duration whose |xi_+(T)| equals xi_target; |xi_+| grows monotonically with T for a fixed shape."""
    shape = _series(zeta0, amplitude, 1.0)
    _, slope, _ = shape.evaluate(np.linspace(0.0, 1.0, 4096))
    t_lo = max(np.max(np.abs(slope)) / (SLOPE_MARGIN * abs(delta)), 1e-6)

    def excess(T: float) -> float:
        return abs(xi_integrals(_series(zeta0, amplitude, T), _problem(delta, phi, T), T).xi_plus) - xi_target

    if excess(t_lo) > 0:
        raise CalibrationError(
            f'detuned phase {xi_target} already exceeded at the shortest admissible duration {t_lo}',
            {'amplitude': amplitude, 'duration': t_lo},
        )
    t_hi = max(2 * t_lo, xi_target / abs(delta))
    for _ in range(60):
        if excess(t_hi) > 0:
            break
        t_hi *= 2
    return brentq(excess, t_lo, t_hi, xtol=1e-14)


def design_individual_control(
    pulse_area_target: float,
    detuned_phase_target: float,
    delta: float,
    variant: Literal['phase_gate', 'x_rotation'] = 'x_rotation',
    boundary: float | None = None,
    phi: float = 0.0,
    amplitude_range: tuple[float, float] | None = None,
    scan_points: int = 41,
    samples: int = DEFAULT_SAMPLES,
    tol: float = CALIBRATION_TOL,
    verify: bool = True,
) -> IndividualDesign:
    """
    One drive Omega(t) that gives int_0^T Omega dt = pulse_area_target on the resonant transition and
    |xi_+(T)| = detuned_phase_target on the transition detuned by delta.

    zeta = zeta0 + A3 sin^3(pi t / T) with zeta0 from the variant (pi/4 or pi/6) or `boundary`. For each
    A3 the duration is solved from the phase target; A3 is then found by scanning `amplitude_range`
    for a sign change of the area residual and refining with Brent's method. Areas are int Omega dt,
    so a resonant NOT needs pi/2 mod pi.
    """
    if delta == 0:
        raise DomainError('delta must be nonzero')
    zeta0 = VARIANT_BOUNDARY[variant] if boundary is None else float(boundary)
    lo, hi = amplitude_range or (-(zeta0 - 0.05), np.pi / 2 - zeta0 - 0.05)

    def residual(amplitude: float) -> float:
        T = _duration_for_phase(zeta0, amplitude, delta, phi, detuned_phase_target)
        return abs(pulse_area(_series(zeta0, amplitude, T), _problem(delta, phi, T))) - pulse_area_target

    amplitude = 0.0
    start = _try(residual, 0.0)
    if start is None or abs(start) >= tol:
        grid = np.union1d(np.linspace(lo, hi, scan_points), [0.0])
        values = np.array([_try(residual, a) for a in grid], dtype=float)
        brackets = [
            (grid[i], grid[i + 1])
            for i in range(len(grid) - 1)
            if np.isfinite(values[i]) and np.isfinite(values[i + 1]) and np.sign(values[i]) != np.sign(values[i + 1])
        ]
        if not brackets:
            raise CalibrationError(
                'no amplitude reaches both the pulse area and the detuned phase',
                {
                    'pulse_area_target': pulse_area_target,
                    'detuned_phase_target': detuned_phase_target,
                    'scan': [[float(a), float(v)] for a, v in zip(grid, values)],
                },
            )
        a_lo, a_hi = min(brackets, key=lambda b: abs(b[0] + b[1]))
        amplitude = brentq(residual, a_lo, a_hi, xtol=1e-13)

    T = _duration_for_phase(zeta0, amplitude, delta, phi, detuned_phase_target)
    series, problem = _series(zeta0, amplitude, T), _problem(delta, phi, T)
    schedule = synthesize_schedule(series, problem, samples=samples, axis='individual', label='individual')
    area = pulse_area(series, problem)
    xi = xi_integrals(series, problem, T).xi_plus
    if abs(abs(area) - pulse_area_target) >= tol or abs(abs(xi) - detuned_phase_target) >= tol:
        raise CalibrationError('individual control missed its targets', {'area': area, 'xi': xi})

    predicted_resonant = resonant_gate(area, phi)
    predicted_detuned = propagator_xy(series, problem, T)
    resonant_target = resonant_gate(np.sign(area) * pulse_area_target, phi)
    w_sign = np.sign(float(problem.effective_envelope(0.0)))
    detuned_target = detuned_gate(w_sign * detuned_phase_target, zeta0, phi)
    resonant, detuned = individual_reports(
        schedule, predicted_resonant, predicted_detuned, resonant_target, detuned_target, verify
    )
    return IndividualDesign(schedule, predicted_resonant, predicted_detuned, resonant, detuned, area, xi, scan_points)


def _try(fn, x):
    try:
        return fn(x)
    except ZetaPulseError as err:
        logger.debug('amplitude %.6f skipped: %s', x, err)
        return None


def individual_reports(
    schedule: PulseSchedule,
    predicted_resonant: Unitary2,
    predicted_detuned: Unitary2,
    resonant_target: Unitary2,
    detuned_target: Unitary2,
    verify: bool = True,
) -> tuple[GateReport, GateReport]:
    """Oracle runs of H_r and H_d driven by the same Omega(t)."""
    series, problem = schedule.series, schedule.problem
    delta = float(problem.fixed(0.0))

    def amplitude(t):
        return omega_prime_from_zeta(series, problem, t)

    reports = []
    for label, predicted, target, sampler in (
        ('resonant', predicted_resonant, resonant_target, resonant_sampler(amplitude, problem.phase, series.T)),
        ('detuned', predicted_detuned, detuned_target, detuned_sampler(amplitude, delta, problem.phase, series.T)),
    ):
        numeric = propagate_converged(sampler, series.T, target=ORACLE_TARGET) if verify else None
        achieved = numeric.U if numeric else predicted
        reports.append(
            GateReport(
                target=target,
                achieved_analytic=predicted,
                achieved_numeric=achieved,
                fidelity_analytic=gate_fidelity(predicted, target),
                fidelity_numeric=gate_fidelity(achieved, target),
                boundary_residuals=(schedule.boundary_residuals,),
                xi_at_T=(xi_integrals(series, problem, series.T),),
                oracle_deviation=phase_aligned_distance(predicted, achieved),
                oracle_defect=numeric.step_doubling_defect if numeric else 0.0,
                label=label,
            )
        )
    return reports[0], reports[1]


def evaluate_individual(
    series: ZetaSeries, delta: float, phi: float = 0.0, samples: int = DEFAULT_SAMPLES, verify: bool = True
) -> IndividualDesign:
    """Reports for a given series (no calibration); targets are the nearest resonant NOT and detuned identity."""
    problem = _problem(delta, phi, series.T)
    schedule = synthesize_schedule(series, problem, samples=samples, axis='individual', label='individual')
    area = pulse_area(series, problem)
    xi = xi_integrals(series, problem, series.T).xi_plus
    predicted_resonant = resonant_gate(area, phi)
    predicted_detuned = propagator_xy(series, problem, series.T)
    resonant, detuned = individual_reports(
        schedule, predicted_resonant, predicted_detuned, NOT, Unitary2.identity(), verify
    )
    return IndividualDesign(schedule, predicted_resonant, predicted_detuned, resonant, detuned, area, xi)
