from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Literal

import numpy as np

from .errors import DomainError


class Axis(str, Enum):
    """Which Hamiltonian entry is designed: the diagonal (sigma_z) or the drive (sigma_xy)."""

    SIGMA_Z = 'sigma_z'
    SIGMA_XY = 'sigma_xy'


@dataclass(frozen=True)
class Envelope:
    """
    Fixed envelope in rad/us: Omega(t) for sigma-z control, Delta'(t) for sigma-x/y control.

    kind='constant': value
    kind='sine':     value + amplitude * sin(frequency * pi * t / T)
    kind='sampled':  linear interpolation of (times, values)
    """

    kind: Literal['constant', 'sine', 'sampled'] = 'constant'
    value: float = 0.0
    amplitude: float = 0.0
    frequency: int = 1
    times: tuple[float, ...] = field(default=(), repr=False)
    values: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in ('constant', 'sine', 'sampled'):
            raise DomainError(f'unknown envelope kind {self.kind!r}')
        if self.kind == 'sampled':
            if len(self.times) < 2 or len(self.times) != len(self.values):
                raise DomainError('sampled envelope needs matching times and values, at least two points')
            if np.any(np.diff(self.times) <= 0):
                raise DomainError('sampled envelope times must increase strictly')

    @classmethod
    def constant(cls, value: float) -> 'Envelope':
        return cls(kind='constant', value=float(value))

    @classmethod
    def sine(cls, value: float, amplitude: float, frequency: int = 1) -> 'Envelope':
        return cls(kind='sine', value=float(value), amplitude=float(amplitude), frequency=int(frequency))

    @classmethod
    def sampled(cls, times, values) -> 'Envelope':
        return cls(kind='sampled', times=tuple(map(float, times)), values=tuple(map(float, values)))

    def __call__(self, t, T: float) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == 'constant':
            return np.full(t.shape, self.value)
        if self.kind == 'sine':
            return self.value + self.amplitude * np.sin(self.frequency * np.pi * t / T)
        return np.interp(t, self.times, self.values)

    def derivative(self, t, T: float) -> np.ndarray:
        """Closed form for constant and sine envelopes, O(h^2) central differences for sampled ones."""
        t = np.asarray(t, dtype=float)
        if self.kind == 'constant':
            return np.zeros(t.shape)
        if self.kind == 'sine':
            w = self.frequency * np.pi / T
            return self.amplitude * w * np.cos(w * t)
        slope = np.gradient(np.asarray(self.values), np.asarray(self.times))
        return np.interp(t, self.times, slope)

    def to_dict(self) -> dict:
        if self.kind == 'constant':
            return {'kind': 'constant', 'value': self.value}
        if self.kind == 'sine':
            return {'kind': 'sine', 'value': self.value, 'amplitude': self.amplitude, 'frequency': self.frequency}
        return {'kind': 'sampled', 'times': list(self.times), 'values': list(self.values)}

    @classmethod
    def from_dict(cls, data: dict) -> 'Envelope':
        kind = data.get('kind', 'constant')
        if kind == 'constant':
            return cls.constant(data['value'])
        if kind == 'sine':
            return cls.sine(data['value'], data.get('amplitude', 0.0), data.get('frequency', 1))
        if kind == 'sampled':
            return cls.sampled(data['times'], data['values'])
        raise DomainError(f'unknown envelope kind {kind!r}')


@dataclass(frozen=True)
class Phase:
    """Drive phase phi(t) = offset + amplitude * sin(2 pi cycles t / T), in radians."""

    offset: float = 0.0
    amplitude: float = 0.0
    cycles: int = 1

    def __call__(self, t, T: float) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.offset + self.amplitude * np.sin(2 * np.pi * self.cycles * t / T)

    def rate(self, t, T: float) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        w = 2 * np.pi * self.cycles / T
        return self.amplitude * w * np.cos(w * t)

    def acceleration(self, t, T: float) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        w = 2 * np.pi * self.cycles / T
        return -self.amplitude * w**2 * np.sin(w * t)

    @property
    def is_constant(self) -> bool:
        return self.amplitude == 0.0

    def to_dict(self) -> dict:
        return {'offset': self.offset, 'amplitude': self.amplitude, 'cycles': self.cycles}

    @classmethod
    def from_dict(cls, data: dict) -> 'Phase':
        return cls(
            offset=float(data.get('offset', 0.0)),
            amplitude=float(data.get('amplitude', 0.0)),
            cycles=int(data.get('cycles', 1)),
        )


@dataclass(frozen=True)
class ControlProblem:
    """
    The fixed part of a two-level control problem.

    For Axis.SIGMA_Z the Hamiltonian is [[Delta, Omega e^{-i phi}], [Omega e^{i phi}, -Delta]]
    with Omega = envelope and Delta designed. For Axis.SIGMA_XY it is the same matrix with
    Delta' = envelope fixed and the drive amplitude Omega' designed.
    """

    axis: Axis
    envelope: Envelope
    T: float
    phase: Phase = field(default_factory=Phase)

    def __post_init__(self):
        object.__setattr__(self, 'axis', Axis(self.axis))
        if not np.isfinite(self.T) or self.T <= 0:
            raise DomainError(f'duration T must be positive, got {self.T!r}')

    @classmethod
    def sigma_z(cls, envelope: Envelope | float, T: float, phase: Phase | None = None) -> 'ControlProblem':
        if not isinstance(envelope, Envelope):
            envelope = Envelope.constant(envelope)
        return cls(Axis.SIGMA_Z, envelope, float(T), phase or Phase())

    @classmethod
    def sigma_xy(cls, detuning: Envelope | float, T: float, phase: Phase | None = None) -> 'ControlProblem':
        if not isinstance(detuning, Envelope):
            detuning = Envelope.constant(detuning)
        return cls(Axis.SIGMA_XY, detuning, float(T), phase or Phase())

    @classmethod
    def singlet_triplet(cls, h: float, T: float) -> 'ControlProblem':
        """H_ST = h sigma_x + J(t) sigma_z: sigma-z control with constant envelope h and phi = 0."""
        if not h > 0:
            raise DomainError(f'coupling h must be positive, got {h!r}')
        return cls.sigma_z(Envelope.constant(h), T)

    def with_duration(self, T: float) -> 'ControlProblem':
        return replace(self, T=float(T))

    def phi(self, t) -> np.ndarray:
        return self.phase(t, self.T)

    def phi_dot(self, t) -> np.ndarray:
        return self.phase.rate(t, self.T)

    def fixed(self, t) -> np.ndarray:
        """Fixed envelope samples: Omega(t) for sigma-z, Delta'(t) for sigma-x/y."""
        return self.envelope(t, self.T)

    def effective_envelope(self, t) -> np.ndarray:
        """Signed envelope W(t) of the sigma-z machinery: Omega, or Delta'' = -Delta' + phi_dot / 2."""
        if self.axis is Axis.SIGMA_Z:
            return self.envelope(t, self.T)
        return -self.envelope(t, self.T) + 0.5 * self.phase.rate(t, self.T)

    def effective_envelope_derivative(self, t) -> np.ndarray:
        if self.axis is Axis.SIGMA_Z:
            return self.envelope.derivative(t, self.T)
        return -self.envelope.derivative(t, self.T) + 0.5 * self.phase.acceleration(t, self.T)

    def to_dict(self) -> dict:
        return {
            'axis': self.axis.value,
            'envelope': self.envelope.to_dict(),
            'phase': self.phase.to_dict(),
            'T': self.T,
        }
