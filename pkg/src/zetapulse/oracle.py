"""
Brute-force propagation of iU' = H(t) U for 2x2 Hamiltonians.

Each step applies exp(-i H(t_mid) dt) exactly through the closed-form SU(2)
exponential; the ordered product is formed by pairwise reduction. Results are
never renormalized.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import pandas as pd

from .analytic import delta_from_zeta, drive_matrix, omega_prime_from_zeta
from .controls import Axis, ControlProblem, Phase
from .errors import ContractViolation, DomainError
from .metrics import NORM_TOL
from .unitary import IDENTITY, Unitary2, expm_su2
from .zeta import ZetaSeries

logger = logging.getLogger(__name__)

DEFAULT_STEPS = 2**14
MAX_STEPS = 2**18
MIN_STEPS = 16
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class HamiltonianSampler:
    """Vectorized t -> stacked 2x2 Hermitian matrices in rad/us over [0, T]."""

    fn: Callable[[np.ndarray], np.ndarray]
    T: float
    label: str = ''

    def __call__(self, t) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(t, dtype=float)), dtype=complex)

    def sample(self, t) -> np.ndarray:
        """Sample and enforce Hermiticity."""
        h = self(t)
        gap = np.max(np.abs(h - np.swapaxes(h.conj(), -1, -2))) if h.size else 0.0
        scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
        if gap > HERMITIAN_TOL * scale:
            raise ContractViolation(f'{self.label or "sampler"} returned a non-Hermitian matrix (gap {gap:.3e})')
        return h


@dataclass(frozen=True)
class PropagationResult:
    """
    U: final propagator at `steps` steps.
    step_doubling_defect: ||U(steps) - U(2 steps)||_F for propagate_numeric,
        ||U(steps / 2) - U(steps)||_F for propagate_converged.
    """

    U: Unitary2
    steps: int
    step_doubling_defect: float

    def to_dict(self) -> dict:
        return {'U': self.U.to_dict(), 'steps': self.steps, 'step_doubling_defect': self.step_doubling_defect}


def ordered_product(mats: np.ndarray) -> np.ndarray:
    """M_{n-1} ... M_1 M_0 over axis -3, by pairwise reduction."""
    mats = np.asarray(mats, dtype=complex)
    while mats.shape[-3] > 1:
        if mats.shape[-3] % 2:
            pad = np.broadcast_to(IDENTITY, mats.shape[:-3] + (1, 2, 2))
            mats = np.concatenate([mats, pad], axis=-3)
        mats = mats[..., 1::2, :, :] @ mats[..., 0::2, :, :]
    return mats[..., 0, :, :]


def _check_window(h: HamiltonianSampler, t_start: float, t_end: float, steps: int):
    if steps < MIN_STEPS:
        raise DomainError(f'steps must be >= {MIN_STEPS}, got {steps}')
    if not 0 <= t_start <= t_end <= h.T * (1 + 1e-12):
        raise DomainError(f'window [{t_start}, {t_end}] not inside [0, {h.T}]')


def _propagate(h: HamiltonianSampler, t_start: float, t_end: float, steps: int) -> np.ndarray:
    dt = (t_end - t_start) / steps
    mids = t_start + (np.arange(steps) + 0.5) * dt
    return ordered_product(expm_su2(h.sample(mids), dt))


def propagate_numeric(
    h: HamiltonianSampler, t_end: float, steps: int = DEFAULT_STEPS, t_start: float = 0.0
) -> PropagationResult:
    """
    Time-ordered propagator from t_start to t_end with midpoint exponentials.

    Parameters:
    h (HamiltonianSampler): The Hamiltonian.
    t_end (float): Final time, at most h.T.
    steps (int): Number of equal steps, at least 16.
    t_start (float): Initial time, default 0.

    Returns:
    PropagationResult: U at `steps` and its distance to the 2*steps result.
    """
    _check_window(h, t_start, t_end, steps)
    coarse = _propagate(h, t_start, t_end, steps)
    fine = _propagate(h, t_start, t_end, 2 * steps)
    return PropagationResult(Unitary2.from_matrix(coarse), steps, float(np.linalg.norm(coarse - fine)))


def propagate_converged(
    h: HamiltonianSampler,
    t_end: float,
    target: float = 1e-9,
    steps: int = DEFAULT_STEPS,
    max_steps: int = MAX_STEPS,
    t_start: float = 0.0,
) -> PropagationResult:
    """Double the step count until successive results differ by less than `target` or `max_steps` is reached."""
    _check_window(h, t_start, t_end, steps)
    previous = _propagate(h, t_start, t_end, steps)
    while True:
        steps *= 2
        current = _propagate(h, t_start, t_end, steps)
        gap = float(np.linalg.norm(current - previous))
        if gap < target or steps >= max_steps:
            if gap >= target:
                logger.debug('%s: step doubling stopped at %d steps with defect %.2e', h.label, steps, gap)
            return PropagationResult(Unitary2.from_matrix(current), steps, gap)
        previous = current


@dataclass(frozen=True)
class StateTrace:
    t: np.ndarray
    p0: np.ndarray
    p1: np.ndarray
    fidelity: np.ndarray
    states: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'t_us': self.t, 'P0': self.p0, 'P1': self.p1, 'F': self.fidelity})


def evolve_state(
    h: HamiltonianSampler,
    psi0,
    samples: int,
    target=None,
    steps: int = DEFAULT_STEPS,
    t_end: float | None = None,
) -> StateTrace:
    """
    Populations and target fidelity |<target|psi(t)>|^2 on `samples` equally spaced times from 0 to t_end.

    The target defaults to psi0, which makes F the return probability.
    """
    psi = np.asarray(psi0, dtype=complex).reshape(-1)
    if psi.shape != (2,) or abs(np.linalg.norm(psi) - 1) > NORM_TOL:
        raise DomainError('psi0 must be a normalized two-component state')
    target = psi if target is None else np.asarray(target, dtype=complex).reshape(-1)
    if target.shape != (2,) or abs(np.linalg.norm(target) - 1) > NORM_TOL:
        raise DomainError('target must be a normalized two-component state')
    if samples < 2:
        raise DomainError(f'samples must be >= 2, got {samples}')
    t_end = h.T if t_end is None else t_end
    _check_window(h, 0.0, t_end, steps)

    segments = samples - 1
    per_segment = max(1, math.ceil(steps / segments))
    dt = t_end / (segments * per_segment)
    mids = (np.arange(segments * per_segment) + 0.5) * dt
    blocks = expm_su2(h.sample(mids), dt).reshape(segments, per_segment, 2, 2)
    hops = ordered_product(blocks)

    states = np.empty((samples, 2), dtype=complex)
    states[0] = psi
    for k in range(segments):
        states[k + 1] = hops[k] @ states[k]
    norms = np.linalg.norm(states, axis=1)
    if np.max(np.abs(norms - 1)) > NORM_TOL:
        raise ContractViolation(f'state norm drifted by {np.max(np.abs(norms - 1)):.3e}')

    grid = np.linspace(0.0, t_end, samples)
    p = np.abs(states) ** 2
    fidelity = np.abs(states @ target.conj()) ** 2
    return StateTrace(grid, p[:, 0], p[:, 1], fidelity, states)


def static_sampler(matrix, T: float, label: str = 'static') -> HamiltonianSampler:
    m = np.asarray(matrix, dtype=complex)
    return HamiltonianSampler(lambda t: np.broadcast_to(m, np.shape(t) + (2, 2)), T, label)


def drive_sampler(detuning, amplitude, phase: Phase, T: float, label: str) -> HamiltonianSampler:
    """[[d(t), r(t) e^{-i phi}], [r(t) e^{i phi}, -d(t)]] from callables d and r."""
    return HamiltonianSampler(lambda t: drive_matrix(detuning(t), amplitude(t), phase(t, T)), T, label)


def sigma_z_sampler(series: ZetaSeries, problem: ControlProblem) -> HamiltonianSampler:
    """H_z with the detuning synthesized from zeta."""
    if problem.axis is not Axis.SIGMA_Z:
        raise DomainError('sigma_z_sampler needs a sigma_z problem')
    return drive_sampler(
        lambda t: delta_from_zeta(series, problem, t), problem.fixed, problem.phase, problem.T, 'H_z'
    )


def sigma_xy_sampler(series: ZetaSeries, problem: ControlProblem, as_printed: bool = False) -> HamiltonianSampler:
    """H_xy with the drive amplitude synthesized from zeta."""
    if problem.axis is not Axis.SIGMA_XY:
        raise DomainError('sigma_xy_sampler needs a sigma_xy problem')
    return drive_sampler(
        problem.fixed,
        lambda t: omega_prime_from_zeta(series, problem, t, as_printed=as_printed),
        problem.phase,
        problem.T,
        'H_xy',
    )


def resonant_sampler(amplitude, phase: Phase, T: float) -> HamiltonianSampler:
    """H_r: the drive on its own resonant transition."""
    return drive_sampler(np.zeros_like, amplitude, phase, T, 'H_r')


def detuned_sampler(amplitude, delta: float, phase: Phase, T: float) -> HamiltonianSampler:
    """H_d: the same drive seen by a transition detuned by delta."""
    return drive_sampler(lambda t: np.full(np.shape(t), float(delta)), amplitude, phase, T, 'H_d')


def table_sampler(times, controllable, fixed, phi, axis: Axis | str) -> HamiltonianSampler:
    """Linear interpolation of a pulse table. Sigma-z tables carry Delta as controllable, sigma-x/y tables Omega'."""
    times = np.asarray(times, dtype=float)
    controllable, fixed, phi = (np.asarray(v, dtype=float) for v in (controllable, fixed, phi))
    axis = Axis(axis)

    def fn(t):
        c, f, p = (np.interp(t, times, v) for v in (controllable, fixed, phi))
        if axis is Axis.SIGMA_Z:
            return drive_matrix(c, f, p)
        return drive_matrix(f, c, p)

    return HamiltonianSampler(fn, float(times[-1]), f'table:{axis.value}')
