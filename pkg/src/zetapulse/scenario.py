"""
Scenario files: one JSON object describing a control problem, a zeta series or a design request,
an initial state, a target and acceptance thresholds.

Angles and rates may be written as numbers or as multiples of pi ('pi/4', '3.5pi', '-2*pi').
Times are in microseconds and rates in rad/us.
"""

import logging
import os
import pathlib
import re
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .analytic import omega_prime_from_zeta, propagator_xy, propagator_z
from .controls import ControlProblem, Envelope, Phase
from .designer import (
    CALIBRATION_TOL,
    DEFAULT_SAMPLES,
    ORACLE_TARGET,
    Calibration,
    IndividualDesign,
    calibrate_scalar,
    design_individual_control,
    evaluate_individual,
    smooth_endpoints,
    synthesize_schedule,
)
from .errors import CalibrationError, DomainError, ScenarioError
from .metrics import gate_fidelity, phase_aligned_distance
from .oracle import (
    DEFAULT_STEPS,
    detuned_sampler,
    evolve_state,
    propagate_converged,
    resonant_sampler,
    sigma_xy_sampler,
    sigma_z_sampler,
)
from .serialize import OPT_INDENT_2, dumps, loads, write_table
from .unitary import HADAMARD, NOT, S_GATE, T_GATE, Unitary2, rx, rz
from .zeta import ZetaSeries, check_admissible

logger = logging.getLogger(__name__)

ScenarioAxis = Literal['sigma_z', 'sigma_xy', 'st', 'individual']

EXIT_PASS = 0
EXIT_THRESHOLD = 1
EXIT_INVALID = 2

GATES = ('I', 'NOT', 'H', 'S', 'T', 'Rx', 'Rz')
STATES = {
    '0': (1, 0),
    '1': (0, 1),
    '+': (2**-0.5, 2**-0.5),
    '-': (2**-0.5, -(2**-0.5)),
    '+i': (2**-0.5, 1j * 2**-0.5),
    '-i': (2**-0.5, -1j * 2**-0.5),
}
DEFAULT_THRESHOLDS = {'oracle_agreement': 1e-6}
UNITS = {'time': 'us', 'rate': 'rad/us', 'angle': 'rad'}

_ANGLE = re.compile(r'^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$')
_SIGNS = {'': 1.0, '+': 1.0, '-': -1.0}


def parse_angle(value) -> float:
    """Numbers pass through; strings may be multiples of pi such as 'pi/4', '-3pi/8', '3.5*pi' or '2pi'."""
    if isinstance(value, bool):
        raise ScenarioError(f'expected a number, got {value!r}')
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        match = _ANGLE.match(value)
        if match:
            coefficient, divisor = match.groups()
            scale = _SIGNS[coefficient] if coefficient in _SIGNS else float(coefficient)
            return scale * np.pi / (float(divisor) if divisor else 1.0)
        try:
            return float(value)
        except ValueError:
            pass
    raise ScenarioError(f'cannot read {value!r} as a number')


def parse_state(value) -> np.ndarray:
    """A label from STATES or [[re, im], [re, im]]."""
    if isinstance(value, str):
        if value not in STATES:
            raise ScenarioError(f'unknown state {value!r}; expected one of {sorted(STATES)}')
        return np.array(STATES[value], dtype=complex)
    try:
        psi = np.array([complex(parse_angle(re_), parse_angle(im)) for re_, im in value], dtype=complex)
    except (TypeError, ValueError) as err:
        raise ScenarioError(f'state must be a label or [[re, im], [re, im]], got {value!r}') from err
    if psi.shape != (2,) or abs(np.linalg.norm(psi) - 1) > 1e-9:
        raise ScenarioError(f'state {value!r} is not a normalized two-component vector')
    return psi


def gate_from_name(name: str, angle: float | None = None) -> Unitary2:
    if name not in GATES:
        raise ScenarioError(f'unknown gate {name!r}; expected one of {GATES}')
    if name in ('Rx', 'Rz'):
        if angle is None:
            raise ScenarioError(f'gate {name} needs an angle')
        return rx(angle) if name == 'Rx' else rz(angle)
    return {'I': Unitary2.identity(), 'NOT': NOT, 'H': HADAMARD, 'S': S_GATE, 'T': T_GATE}[name]


def _series_from(data: dict) -> ZetaSeries:
    terms = [{'n': rec['n'], 'A': parse_angle(rec['A']), 'a': rec.get('a', 1)} for rec in data.get('terms', ())]
    return ZetaSeries.from_dict({'A0': parse_angle(data['A0']), 'T': parse_angle(data['T']), 'terms': terms})


def _envelope_from(data) -> Envelope:
    if not isinstance(data, dict):
        return Envelope.constant(parse_angle(data))
    data = {k: parse_angle(v) if k in ('value', 'amplitude') else v for k, v in data.items()}
    return Envelope.from_dict(data)


def _phase_from(data) -> Phase:
    if data is None:
        return Phase()
    if not isinstance(data, dict):
        return Phase(offset=parse_angle(data))
    return Phase(
        offset=parse_angle(data.get('offset', 0.0)),
        amplitude=parse_angle(data.get('amplitude', 0.0)),
        cycles=int(data.get('cycles', 1)),
    )


def _as_pairs(value):
    return value if value is None or isinstance(value, str) else tuple(tuple(pair) for pair in value)


def _as_lists(value):
    return value if value is None or isinstance(value, str) else [list(pair) for pair in value]


@dataclass(frozen=True)
class Scenario:
    """
    One run configuration.

    axis: 'sigma_z' (envelope is Omega), 'sigma_xy' (envelope is Delta'), 'st' (coupling h) or
    'individual' (detuning delta, with either a fixed zeta series or a design block).
    """

    name: str
    axis: ScenarioAxis
    zeta: ZetaSeries | None = None
    envelope: Envelope | None = None
    phase: Phase = field(default_factory=Phase)
    h: float | None = None
    delta: float | None = None
    smooth_endpoints: bool = False
    calibration: dict | None = None
    design: dict | None = None
    initial_state: str | tuple = '0'
    target_gate: str | None = None
    target_angle: float | None = None
    target_state: str | tuple | None = None
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    samples: int = DEFAULT_SAMPLES
    steps: int = DEFAULT_STEPS

    def __post_init__(self):
        if not self.name or not re.fullmatch(r'[A-Za-z0-9_.-]+', self.name):
            raise ScenarioError(f'scenario name {self.name!r} must be a plain file-name token')
        if self.axis not in ('sigma_z', 'sigma_xy', 'st', 'individual'):
            raise ScenarioError(f'unknown axis {self.axis!r}')
        if self.axis in ('sigma_z', 'sigma_xy') and (self.zeta is None or self.envelope is None):
            raise ScenarioError(f'{self.axis} scenarios need zeta and envelope')
        if self.axis == 'st' and (self.zeta is None or not self.h or self.h <= 0):
            raise ScenarioError('st scenarios need zeta and a positive h')
        if self.axis == 'individual':
            if not self.delta:
                raise ScenarioError('individual scenarios need a nonzero delta')
            if self.zeta is None and self.design is None:
                raise ScenarioError('individual scenarios need zeta or a design block')
            if not self.phase.is_constant:
                raise ScenarioError('individual control takes a constant phase')
        if self.smooth_endpoints and self.axis != 'st':
            raise ScenarioError('smooth_endpoints applies to st scenarios only')
        if self.calibration is not None and ('target' not in self.calibration or 'bracket' not in self.calibration):
            raise ScenarioError('calibration needs target and bracket')
        if self.target_gate is not None:
            gate_from_name(self.target_gate, self.target_angle)
        if self.target_state is not None:
            parse_state(self.target_state)
        parse_state(self.initial_state)
        if self.samples < 2:
            raise ScenarioError('samples must be >= 2')

    @property
    def target(self) -> Unitary2 | None:
        return None if self.target_gate is None else gate_from_name(self.target_gate, self.target_angle)

    @classmethod
    def from_dict(cls, data: dict) -> 'Scenario':
        try:
            target = data.get('target') or {}
            output = data.get('output') or {}
            design = data.get('design')
            if design is not None:
                angles = ('pulse_area_target', 'detuned_phase_target', 'boundary')
                design = {k: parse_angle(v) if k in angles and v is not None else v for k, v in design.items()}
            calibration = data.get('calibration')
            if calibration is not None:
                calibration = dict(calibration)
                if 'target' in calibration:
                    calibration['target'] = parse_angle(calibration['target'])
                if 'bracket' in calibration:
                    calibration['bracket'] = [parse_angle(b) for b in calibration['bracket']]
                if calibration.get('modulo') is not None:
                    calibration['modulo'] = parse_angle(calibration['modulo'])
            return cls(
                name=data['name'],
                axis=data['axis'],
                zeta=_series_from(data['zeta']) if data.get('zeta') else None,
                envelope=_envelope_from(data['envelope']) if data.get('envelope') is not None else None,
                phase=_phase_from(data.get('phase')),
                h=parse_angle(data['h']) if data.get('h') is not None else None,
                delta=parse_angle(data['delta']) if data.get('delta') is not None else None,
                smooth_endpoints=bool(data.get('smooth_endpoints', False)),
                calibration=calibration,
                design=design,
                initial_state=_as_pairs(data.get('initial_state', '0')),
                target_gate=target.get('gate'),
                target_angle=parse_angle(target['angle']) if target.get('angle') is not None else None,
                target_state=_as_pairs(target.get('state')),
                thresholds={k: float(v) for k, v in (data.get('thresholds') or DEFAULT_THRESHOLDS).items()},
                samples=int(output.get('samples', DEFAULT_SAMPLES)),
                steps=int(output.get('steps', DEFAULT_STEPS)),
            )
        except KeyError as err:
            raise ScenarioError(f'scenario is missing required key {err}') from err
        except (DomainError, TypeError) as err:
            raise ScenarioError(str(err)) from err

    def to_dict(self) -> dict:
        out = {'name': self.name, 'axis': self.axis}
        if self.zeta is not None:
            out['zeta'] = self.zeta.to_dict()
        if self.envelope is not None:
            out['envelope'] = self.envelope.to_dict()
        out['phase'] = self.phase.to_dict()
        for key in ('h', 'delta', 'calibration', 'design'):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        if self.smooth_endpoints:
            out['smooth_endpoints'] = True
        out['initial_state'] = _as_lists(self.initial_state)
        target = {}
        if self.target_gate is not None:
            target['gate'] = self.target_gate
        if self.target_angle is not None:
            target['angle'] = self.target_angle
        if self.target_state is not None:
            target['state'] = _as_lists(self.target_state)
        out['target'] = target
        out['thresholds'] = dict(self.thresholds)
        out['output'] = {'samples': self.samples, 'steps': self.steps}
        return out

    def with_overrides(self, steps: int | None = None, tolerance: float | None = None) -> 'Scenario':
        """Command-line overrides; `tolerance` replaces the oracle agreement threshold."""
        thresholds = dict(self.thresholds)
        if tolerance is not None:
            thresholds['oracle_agreement'] = float(tolerance)
        return replace(self, steps=steps or self.steps, thresholds=thresholds)


def load_scenario(path: str | os.PathLike | pathlib.Path) -> Scenario:
    try:
        data = loads(pathlib.Path(path))
    except (OSError, ValueError) as err:
        raise ScenarioError(f'cannot read scenario {path}: {err}') from err
    if not isinstance(data, dict):
        raise ScenarioError(f'scenario {path} must hold a JSON object')
    return Scenario.from_dict(data)


@dataclass
class ScenarioOutcome:
    name: str
    status: int
    files: list[pathlib.Path] = field(default_factory=list)
    summary: dict = field(default_factory=dict)


_RULES = {
    'oracle_agreement': ('oracle_deviation', lambda v, limit: v < limit),
    'target_fidelity': ('fidelity_numeric', lambda v, limit: v >= limit),
    'state_fidelity': ('final_state_fidelity', lambda v, limit: v >= limit),
    'endpoint_residual': ('endpoint_residual', lambda v, limit: v < limit),
}


def evaluate_thresholds(thresholds: dict, measured: dict[str, dict]) -> dict:
    """
    Compare measured values to thresholds.

    `measured` maps a run label to its measurements; a threshold whose measurement is absent
    from a run is skipped for that run.
    """
    checks = {}
    for name, limit in thresholds.items():
        if name not in _RULES:
            raise ScenarioError(f'unknown threshold {name!r}; expected one of {sorted(_RULES)}')
        key, passes = _RULES[name]
        for label, values in measured.items():
            if key in values:
                checks[f'{label}.{name}'] = {
                    'value': values[key],
                    'limit': limit,
                    'passed': bool(passes(values[key], limit)),
                }
    return checks


def run_scenario(
    scenario: Scenario, out_dir: str | os.PathLike | pathlib.Path, steps: int | None = None
) -> ScenarioOutcome:
    """
    Run one scenario and write pulse.csv, trace CSV(s) and report.json under out_dir/<name>/.

    Parameters:
    scenario (Scenario): The configuration.
    out_dir (str | os.PathLike | pathlib.Path): Parent directory of the scenario's output directory.
    steps (int, optional): Initial oracle step count, overriding the scenario's.

    Returns:
    ScenarioOutcome: status 0 when every threshold passes, 1 when one fails, 2 for invalid input
    (admissibility or calibration failure, described in report.json).
    """
    out = pathlib.Path(out_dir) / scenario.name
    out.mkdir(parents=True, exist_ok=True)
    steps = steps or scenario.steps
    logger.info('scenario %s: axis %s', scenario.name, scenario.axis)
    try:
        if scenario.axis == 'individual':
            return _run_individual(scenario, out, steps)
        return _run_single(scenario, out, steps)
    except CalibrationError as err:
        return _invalid(scenario, out, {'error': str(err), 'calibration': err.diagnostics})
    except DomainError as err:
        return _invalid(scenario, out, {'error': str(err)})


def _invalid(scenario: Scenario, out: pathlib.Path, payload: dict) -> ScenarioOutcome:
    summary = {'name': scenario.name, 'status': EXIT_INVALID, **payload}
    path = out / 'report.json'
    dumps(summary, option=OPT_INDENT_2, output=path)
    logger.warning('scenario %s rejected: %s', scenario.name, payload['error'])
    return ScenarioOutcome(scenario.name, EXIT_INVALID, [path], summary)


def _finish(scenario: Scenario, out: pathlib.Path, files: list, summary: dict, measured: dict) -> ScenarioOutcome:
    checks = evaluate_thresholds(scenario.thresholds, measured)
    status = EXIT_PASS if all(c['passed'] for c in checks.values()) else EXIT_THRESHOLD
    summary = {**summary, 'measured': measured, 'checks': checks, 'status': status}
    path = out / 'report.json'
    dumps(summary, option=OPT_INDENT_2, output=path)
    files.append(path)
    logger.info('scenario %s finished with status %d', scenario.name, status)
    return ScenarioOutcome(scenario.name, status, files, summary)


def _problem(scenario: Scenario, T: float) -> ControlProblem:
    if scenario.axis == 'sigma_z':
        return ControlProblem.sigma_z(scenario.envelope, T, scenario.phase)
    if scenario.axis == 'sigma_xy':
        return ControlProblem.sigma_xy(scenario.envelope, T, scenario.phase)
    return ControlProblem.singlet_triplet(scenario.h, T)


def _calibrate(scenario: Scenario, series: ZetaSeries, problem: ControlProblem) -> Calibration:
    cal = scenario.calibration
    h = scenario.h
    return calibrate_scalar(
        series,
        cal.get('objective', 'xi_plus_at_T'),
        cal['target'],
        tuple(cal['bracket']),
        problem,
        free=cal.get('free', 0),
        constraint=(lambda s: smooth_endpoints(s, h)) if scenario.smooth_endpoints else None,
        modulo=cal['modulo'] if 'modulo' in cal else np.pi,
        tol=float(cal.get('tol', CALIBRATION_TOL)),
    )


def _target_state(scenario: Scenario, psi0: np.ndarray) -> np.ndarray | None:
    if scenario.target_state is not None:
        return parse_state(scenario.target_state)
    if scenario.target is not None:
        return scenario.target.matrix @ psi0
    return None


def _run_single(scenario: Scenario, out: pathlib.Path, steps: int) -> ScenarioOutcome:
    series = scenario.zeta
    problem = _problem(scenario, series.T)
    if scenario.smooth_endpoints:
        series = smooth_endpoints(series, scenario.h)

    report = check_admissible(series, lambda t: np.abs(problem.effective_envelope(t)))
    if not report.admissible:
        return _invalid(scenario, out, {'error': 'zeta series is not admissible', 'admissibility': report})

    calibration = None
    if scenario.calibration:
        calibration = _calibrate(scenario, series, problem)
        series, problem = calibration.series, calibration.problem

    schedule = synthesize_schedule(series, problem, samples=scenario.samples, axis=scenario.axis, label=scenario.name)
    files = [write_table(schedule.to_frame(), out / 'pulse.csv')]

    if scenario.axis == 'sigma_xy':
        analytic = propagator_xy(series, problem, series.T)
        sampler = sigma_xy_sampler(series, problem)
    else:
        analytic = propagator_z(series, problem, series.T)
        sampler = sigma_z_sampler(series, problem)
    numeric = propagate_converged(sampler, series.T, target=ORACLE_TARGET, steps=steps)

    psi0 = parse_state(scenario.initial_state)
    target_state = _target_state(scenario, psi0)
    trace = evolve_state(sampler, psi0, scenario.samples, target=target_state, steps=steps)
    files.append(write_table(trace.to_frame(), out / 'trace.csv'))

    measured = {
        'oracle_deviation': phase_aligned_distance(analytic, numeric.U),
        'oracle_steps': numeric.steps,
        'oracle_defect': numeric.step_doubling_defect,
        'final_P0': float(trace.p0[-1]),
        'final_P1': float(trace.p1[-1]),
        'endpoint_residual': max(map(abs, schedule.boundary_residuals)) / float(np.max(np.abs(schedule.fixed))),
    }
    if scenario.target is not None:
        measured['fidelity_analytic'] = gate_fidelity(analytic, scenario.target).value
        measured['fidelity_numeric'] = gate_fidelity(numeric.U, scenario.target).value
    if target_state is not None:
        measured['final_state_fidelity'] = float(trace.fidelity[-1])

    summary = {
        'name': scenario.name,
        'units': UNITS,
        'zeta': series,
        'problem': problem,
        'admissibility': report,
        'calibration': calibration,
        'achieved_analytic': analytic,
        'achieved_numeric': numeric.U,
    }
    return _finish(scenario, out, files, summary, {'gate': measured})


def _run_individual(scenario: Scenario, out: pathlib.Path, steps: int) -> ScenarioOutcome:
    """Both transitions are judged against the design's own targets; target_gate is not used."""
    phi = scenario.phase.offset
    if scenario.design is not None:
        design_cfg = scenario.design
        design: IndividualDesign = design_individual_control(
            design_cfg['pulse_area_target'],
            design_cfg['detuned_phase_target'],
            scenario.delta,
            variant=design_cfg.get('variant', 'x_rotation'),
            boundary=design_cfg.get('boundary'),
            phi=phi,
            amplitude_range=tuple(design_cfg['amplitude_range']) if design_cfg.get('amplitude_range') else None,
            samples=scenario.samples,
        )
    else:
        report = check_admissible(scenario.zeta, abs(scenario.delta))
        if not report.admissible:
            return _invalid(scenario, out, {'error': 'zeta series is not admissible', 'admissibility': report})
        design = evaluate_individual(scenario.zeta, scenario.delta, phi, samples=scenario.samples)

    schedule = design.schedule
    series, problem = schedule.series, schedule.problem
    files = [write_table(schedule.to_frame(), out / 'pulse.csv')]
    psi0 = parse_state(scenario.initial_state)

    def amplitude(t):
        return omega_prime_from_zeta(series, problem, t)

    measured = {}
    for label, gate_report, sampler in (
        ('resonant', design.resonant, resonant_sampler(amplitude, problem.phase, series.T)),
        ('detuned', design.detuned, detuned_sampler(amplitude, scenario.delta, problem.phase, series.T)),
    ):
        trace = evolve_state(sampler, psi0, scenario.samples, target=gate_report.target.matrix @ psi0, steps=steps)
        files.append(write_table(trace.to_frame(), out / f'trace_{label}.csv'))
        measured[label] = {
            'oracle_deviation': gate_report.oracle_deviation,
            'fidelity_analytic': gate_report.fidelity_analytic.value,
            'fidelity_numeric': gate_report.fidelity_numeric.value,
            'final_P0': float(trace.p0[-1]),
            'final_P1': float(trace.p1[-1]),
            'final_state_fidelity': float(trace.fidelity[-1]),
        }

    summary = {
        'name': scenario.name,
        'units': UNITS,
        'zeta': series,
        'problem': problem,
        'pulse_area': design.area,
        'detuned_xi': design.xi,
        'resonant': design.resonant,
        'detuned': design.detuned,
    }
    return _finish(scenario, out, files, summary, measured)
