import argparse
import logging
import pathlib
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .analytic import propagator_z
from .controls import ControlProblem, Envelope
from .designer import FIDELITY_FLOOR, ST_COUPLING, build_st_gate, clifford_table, is_closed
from .errors import ScenarioError, ZetaPulseError
from .metrics import phase_aligned_distance
from .oracle import DEFAULT_STEPS, evolve_state, propagate_converged, sigma_z_sampler, table_sampler
from .scenario import (
    EXIT_INVALID,
    EXIT_PASS,
    EXIT_THRESHOLD,
    ScenarioOutcome,
    load_scenario,
    parse_angle,
    parse_state,
    run_scenario,
)
from .serialize import OPT_INDENT_2, OPT_SORT_KEYS, dumps, read_table, write_table
from .zeta import Term, ZetaSeries, check_admissible

logger = logging.getLogger(__name__)

DEFAULT_SEED = 1729
DEFAULT_TOLERANCE = 1e-6
VERIFY_COUNT = 200
ENDPOINT_TOL = 1e-6

# random verify cases keep well inside the admissible domain
VERIFY_ZETA_MARGIN = 0.25
VERIFY_MAX_SLOPE = 0.5
VERIFY_ATTEMPTS = 20

_TABLE_AXIS = {'sigma_z': 'sigma_z', 'st': 'sigma_z', 'sigma_xy': 'sigma_xy', 'individual': 'sigma_xy'}


@dataclass
class VerifySummary:
    count: int
    seed: int
    tolerance: float
    cases: list[dict] = field(default_factory=list)

    @property
    def failed(self) -> int:
        return sum(not case['passed'] for case in self.cases)

    @property
    def max_deviation(self) -> float:
        return max((case['deviation'] for case in self.cases if case['deviation'] is not None), default=0.0)

    def to_dict(self) -> dict:
        return {
            'count': self.count,
            'seed': self.seed,
            'tolerance': self.tolerance,
            'passed': self.count - self.failed,
            'failed': self.failed,
            'max_deviation': self.max_deviation,
            'cases': self.cases,
        }


def _random_envelope(rng: np.random.Generator) -> Envelope:
    if rng.random() < 0.5:
        return Envelope.constant(rng.uniform(np.pi, 3 * np.pi))
    value = rng.uniform(2 * np.pi, 3 * np.pi)
    return Envelope.sine(value, rng.uniform(0.0, 0.5) * value, int(rng.integers(1, 3)))


def _random_series(rng: np.random.Generator, T: float, envelope: Envelope) -> ZetaSeries:
    """Draw terms until the series stays inside the margins; falls back to a constant series."""
    A0 = rng.uniform(np.pi / 8, 3 * np.pi / 8)
    for _ in range(VERIFY_ATTEMPTS):
        terms = tuple(
            Term(int(rng.integers(1, 4)), rng.uniform(-0.3, 0.3), int(rng.integers(1, 3)))
            for _ in range(int(rng.integers(1, 4)))
        )
        series = ZetaSeries(A0, T, terms)
        report = check_admissible(series, lambda t: envelope(t, T))
        if (
            report.admissible
            and report.min_zeta >= VERIFY_ZETA_MARGIN
            and report.max_zeta <= np.pi / 2 - VERIFY_ZETA_MARGIN
            and report.max_slope_ratio <= VERIFY_MAX_SLOPE
        ):
            return series
    return ZetaSeries(A0, T)


def run_verify_suite(
    count: int = VERIFY_COUNT,
    seed: int = DEFAULT_SEED,
    tolerance: float = DEFAULT_TOLERANCE,
    steps: int = DEFAULT_STEPS,
) -> VerifySummary:
    """
    Compare the closed-form sigma-z propagator with the oracle over seeded random admissible cases.

    Case 0 is always the constant zeta = pi/4 Rabi case. Failures, including raised errors, are
    recorded per case and never propagate.
    """
    if count < 1:
        raise ZetaPulseError(f'count must be >= 1, got {count}')
    rng = np.random.default_rng(seed)
    summary = VerifySummary(count, seed, tolerance)
    for index in range(count):
        T = float(rng.uniform(0.6, 1.0))
        if index == 0:
            envelope = Envelope.constant(rng.uniform(np.pi, 3 * np.pi))
            series = ZetaSeries.constant(np.pi / 4, T)
        else:
            envelope = _random_envelope(rng)
            series = _random_series(rng, T, envelope)
        case = {'index': index, 'zeta': series.to_dict(), 'envelope': envelope.to_dict(), 'deviation': None}
        try:
            problem = ControlProblem.sigma_z(envelope, T)
            analytic = propagator_z(series, problem, T)
            numeric = propagate_converged(sigma_z_sampler(series, problem), T, target=tolerance / 10, steps=steps)
            case['deviation'] = phase_aligned_distance(analytic, numeric.U)
            case['oracle_steps'] = numeric.steps
            case['oracle_defect'] = numeric.step_doubling_defect
            case['passed'] = case['deviation'] < tolerance
        except ZetaPulseError as err:
            case['error'] = f'{type(err).__name__}: {err}'
            case['passed'] = False
        if not case['passed']:
            logger.warning('verify case %d failed: %s', index, case.get('error', case['deviation']))
        summary.cases.append(case)
    logger.info('verify: %d/%d passed, max deviation %.3e', count - summary.failed, count, summary.max_deviation)
    return summary


def _cmd_design(args) -> int:
    angle = parse_angle(args.angle) if args.angle is not None else None
    h = parse_angle(args.h)
    schedules, report = build_st_gate(args.gate, h, angle)
    out = pathlib.Path(args.out_dir) / f'design_{report.label}'
    for i, schedule in enumerate(schedules):
        write_table(schedule.to_frame(), out / f'pulse_{i}.csv')
    smooth = all(max(map(abs, pair)) < ENDPOINT_TOL * h for pair in report.boundary_residuals)
    status = EXIT_PASS if report.passes() and smooth else EXIT_THRESHOLD
    dumps(
        {'report': report, 'schedules': schedules, 'smooth': smooth, 'status': status},
        option=OPT_INDENT_2,
        output=out / 'report.json',
    )
    print(f'{report.label}: fidelity {report.fidelity_numeric.value:.9f}, smooth={smooth}, {len(schedules)} pulse(s)')
    return status


def _cmd_propagate(args) -> int:
    table = read_table(args.table)
    sampler = table_sampler(
        table['t_us'],
        table['controllable_rad_per_us'],
        table['envelope_rad_per_us'],
        table['phi_rad'],
        _TABLE_AXIS[args.axis],
    )
    psi0 = parse_state(args.initial_state)
    target = parse_state(args.target_state) if args.target_state else None
    trace = evolve_state(sampler, psi0, args.samples, target=target, steps=args.steps)
    path = write_table(trace.to_frame(), pathlib.Path(args.out_dir) / 'trace.csv')
    print(f'{path}: P0={trace.p0[-1]:.9f} P1={trace.p1[-1]:.9f} F={trace.fidelity[-1]:.9f}')
    if args.tolerance is not None and target is not None and trace.fidelity[-1] < 1 - args.tolerance:
        return EXIT_THRESHOLD
    return EXIT_PASS


def _cmd_verify(args) -> int:
    summary = run_verify_suite(args.count, args.seed, args.tolerance or DEFAULT_TOLERANCE, args.steps)
    dumps(summary, option=OPT_INDENT_2 | OPT_SORT_KEYS, output=pathlib.Path(args.out_dir) / 'verify_summary.json')
    print(f'verify: {summary.count - summary.failed}/{summary.count} passed, max deviation {summary.max_deviation:.3e}')
    return EXIT_PASS if summary.failed == 0 else EXIT_THRESHOLD


def _cmd_clifford(args) -> int:
    h = parse_angle(args.h)
    entries = clifford_table(h)
    closed = is_closed([e.target for e in entries])
    fidelities = [e.report.fidelity_numeric.value for e in entries]
    smooth = all(
        max(map(abs, s.boundary_residuals)) < ENDPOINT_TOL * h for e in entries for s in e.schedules
    )
    status = EXIT_PASS if closed and smooth and min(fidelities) >= FIDELITY_FLOOR else EXIT_THRESHOLD
    dumps(
        {'entries': entries, 'closed': closed, 'smooth': smooth, 'min_fidelity': min(fidelities), 'status': status},
        option=OPT_INDENT_2,
        output=pathlib.Path(args.out_dir) / 'clifford.json',
    )
    print(f'clifford: {len(entries)} classes, closed={closed}, min fidelity {min(fidelities):.9f}')
    return status


def _run_one(path: str, args) -> ScenarioOutcome:
    try:
        scenario = load_scenario(path).with_overrides(steps=args.steps, tolerance=args.tolerance)
    except ScenarioError as err:
        logger.error('%s: %s', path, err)
        return ScenarioOutcome(pathlib.Path(path).stem, EXIT_INVALID)
    return run_scenario(scenario, args.out_dir)


def _cmd_scenario(args) -> int:
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        outcomes = list(pool.map(lambda p: _run_one(p, args), args.paths))
    for outcome in outcomes:
        print(f'{outcome.name}: status {outcome.status}')
    return max(outcome.status for outcome in outcomes)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out-dir', default='out', help='directory for output files (default: out)')
    common.add_argument('--steps', type=int, default=None, help=f'initial oracle step count (default: {DEFAULT_STEPS})')
    common.add_argument('--tolerance', type=float, default=None, help='oracle agreement threshold')
    common.add_argument('-v', '--verbose', action='count', default=0, help='-v for INFO, -vv for DEBUG')
    common.add_argument('-q', '--quiet', action='store_true', help='errors only')

    ap = argparse.ArgumentParser(prog='zetapulse', description='Pulse design from an auxiliary angle zeta(t).')
    ap.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = ap.add_subparsers(dest='command', required=True)

    p = sub.add_parser('design', parents=[common], help='smooth singlet-triplet gate schedules')
    p.add_argument('gate', choices=['H', 'S', 'T', 'NOT', 'Rx', 'Rz'])
    p.add_argument('--angle', default=None, help="rotation angle for Rx/Rz, e.g. 'pi/4'")
    p.add_argument('--h', default=str(ST_COUPLING), help='ST coupling in rad/us (default: 2pi)')
    p.set_defaults(run=_cmd_design)

    p = sub.add_parser('propagate', parents=[common], help='state trace of a pulse table')
    p.add_argument('table', help='pulse CSV with t_us, controllable_rad_per_us, envelope_rad_per_us, phi_rad')
    p.add_argument('--axis', choices=sorted(_TABLE_AXIS), default='sigma_z')
    p.add_argument('--initial-state', default='0')
    p.add_argument('--target-state', default=None)
    p.add_argument('--samples', type=int, default=401)
    p.set_defaults(run=_cmd_propagate)

    p = sub.add_parser('verify', parents=[common], help='random-case oracle comparison')
    p.add_argument('--count', type=int, default=VERIFY_COUNT)
    p.add_argument('--seed', type=int, default=DEFAULT_SEED)
    p.set_defaults(run=_cmd_verify)

    p = sub.add_parser('clifford', parents=[common], help='the 24 single-qubit Cliffords as smooth schedules')
    p.add_argument('--h', default=str(ST_COUPLING), help='ST coupling in rad/us (default: 2pi)')
    p.set_defaults(run=_cmd_clifford)

    p = sub.add_parser('scenario', parents=[common], help='run scenario files')
    p.add_argument('paths', nargs='+')
    p.add_argument('--workers', type=int, default=None)
    p.set_defaults(run=_cmd_scenario)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    level = logging.ERROR if args.quiet else (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    if args.steps is None:
        args.steps = DEFAULT_STEPS if args.command in ('propagate', 'verify') else None
    try:
        return args.run(args)
    except ZetaPulseError as err:
        logger.error('%s', err)
        return EXIT_INVALID


if __name__ == '__main__':
    sys.exit(main())
