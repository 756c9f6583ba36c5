import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Literal

import numpy as np

from .errors import DomainError, InvalidEnvelopeError

logger = logging.getLogger(__name__)

DEFAULT_GUARD = 1e-3
DEFAULT_GRID_POINTS = 4096
MIN_GRID_POINTS = 64
SIN_SNAP = 1e-12

ViolationKind = Literal['range', 'slope', 'divergence-proximity']


@dataclass(frozen=True)
class Term:
    """One A * sin^n(a * pi * t / T) term of the series."""

    n: int
    A: float
    a: int = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f'term power n must be a positive integer, got {self.n!r}')
        if int(self.a) != self.a or self.a < 1:
            raise DomainError(f'term frequency a must be a positive integer, got {self.a!r}')
        object.__setattr__(self, 'n', int(self.n))
        object.__setattr__(self, 'a', int(self.a))
        object.__setattr__(self, 'A', float(self.A))

    def to_dict(self) -> dict:
        return {'n': self.n, 'A': self.A, 'a': self.a}


@dataclass(frozen=True)
class ZetaSeries:
    """
    The auxiliary function zeta(t) = A0 + sum_k A_k sin^{n_k}(a_k pi t / T).

    Every a_k is a positive integer, so zeta(0) = zeta(T) = A0. Values and both
    derivatives come from term-by-term closed forms.
    """

    A0: float
    T: float
    terms: tuple[Term, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not np.isfinite(self.T) or self.T <= 0:
            raise DomainError(f'duration T must be positive, got {self.T!r}')
        object.__setattr__(self, 'A0', float(self.A0))
        object.__setattr__(self, 'T', float(self.T))
        object.__setattr__(self, 'terms', tuple(t if isinstance(t, Term) else Term(*t) for t in self.terms))

    @classmethod
    def constant(cls, value: float, T: float) -> 'ZetaSeries':
        return cls(A0=value, T=T, terms=())

    def evaluate(self, t: float | np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Evaluate zeta, zeta_dot and zeta_ddot at t (scalar or array).

        Parameters:
        t (float | np.ndarray): Time(s) in [0, T].

        Returns:
        tuple: (zeta, zeta_dot, zeta_ddot) with the shape of t.
        """
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.T) or np.any(~np.isfinite(t)):
            bad = t[(t < 0) | (t > self.T) | ~np.isfinite(t)].flat[0]
            raise DomainError(f't={bad!r} outside [0, {self.T}]')
        zeta = np.full(t.shape, self.A0)
        zeta_dot = np.zeros(t.shape)
        zeta_ddot = np.zeros(t.shape)
        for term in self.terms:
            w = term.a * np.pi / self.T
            s = np.sin(w * t)
            s = np.where(np.abs(s) < SIN_SNAP, 0.0, s)
            c = np.cos(w * t)
            n = term.n
            zeta = zeta + term.A * s**n
            zeta_dot = zeta_dot + term.A * n * s ** (n - 1) * c * w
            if n == 1:
                curvature = -s
            else:
                curvature = n * (n - 1) * s ** (n - 2) * c**2 - n * s**n
            zeta_ddot = zeta_ddot + term.A * w**2 * curvature
        return zeta, zeta_dot, zeta_ddot

    def with_amplitude(self, index: int, amplitude: float) -> 'ZetaSeries':
        terms = list(self.terms)
        terms[index] = replace(terms[index], A=amplitude)
        return replace(self, terms=tuple(terms))

    def with_duration(self, T: float) -> 'ZetaSeries':
        return replace(self, T=T)

    def with_term(self, term: Term) -> 'ZetaSeries':
        return replace(self, terms=(*self.terms, term))

    def to_dict(self) -> dict:
        return {'A0': self.A0, 'T': self.T, 'terms': [t.to_dict() for t in self.terms]}

    @classmethod
    def from_dict(cls, data: dict) -> 'ZetaSeries':
        try:
            terms = tuple(Term(n=rec['n'], A=rec['A'], a=rec.get('a', 1)) for rec in data.get('terms', ()))
            return cls(A0=data['A0'], T=data['T'], terms=terms)
        except (KeyError, TypeError) as err:
            raise DomainError(f'malformed zeta series record: {err}') from err


def eval_zeta(series: ZetaSeries, t: float) -> tuple[float, float, float]:
    """Return (zeta, zeta_dot, zeta_ddot) at a single time t in [0, T]."""
    zeta, zeta_dot, zeta_ddot = series.evaluate(t)
    return float(zeta), float(zeta_dot), float(zeta_ddot)


@dataclass(frozen=True)
class Violation:
    t: float
    kind: ViolationKind

    def to_dict(self) -> dict:
        return {'t': self.t, 'kind': self.kind}


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    min_zeta: float
    max_zeta: float
    max_slope_ratio: float
    violations: tuple[Violation, ...] = ()

    def first(self, kind: ViolationKind | None = None) -> Violation | None:
        for v in self.violations:
            if kind is None or v.kind == kind:
                return v
        return None

    def to_dict(self) -> dict:
        return {
            'admissible': self.admissible,
            'min_zeta': self.min_zeta,
            'max_zeta': self.max_zeta,
            'max_slope_ratio': self.max_slope_ratio,
            'violations': [v.to_dict() for v in self.violations],
        }


def check_admissible(
    series: ZetaSeries,
    envelope: float | Callable[[np.ndarray], np.ndarray],
    grid_points: int = DEFAULT_GRID_POINTS,
    guard: float = DEFAULT_GUARD,
) -> AdmissibilityReport:
    """
    Check the series against the domain that keeps cot(2 zeta), csc(2 zeta) and
    sqrt(1 - zeta_dot^2 / W^2) finite and real.

    Only the grid points are checked; a report marked admissible does not
    certify the gaps between them.

    Parameters:
    series (ZetaSeries): The auxiliary function.
    envelope (float | Callable): Envelope magnitude |W(t)| in rad/us, constant or sampled.
    grid_points (int): Number of uniform samples over [0, T], at least 64.
    guard (float): Margin epsilon for both the range and slope checks, 0 < epsilon < 1.

    Returns:
    AdmissibilityReport: Extrema and every flagged grid point.
    """
    if grid_points < MIN_GRID_POINTS:
        raise DomainError(f'grid_points must be >= {MIN_GRID_POINTS}, got {grid_points}')
    if not 0 < guard < 1:
        raise DomainError(f'guard must lie in (0, 1), got {guard}')

    grid = np.linspace(0.0, series.T, grid_points)
    zeta, zeta_dot, _ = series.evaluate(grid)
    if callable(envelope):
        env = np.broadcast_to(np.asarray(envelope(grid), dtype=float), grid.shape)
    else:
        env = np.full(grid.shape, float(envelope))
    if np.any(~(env > 0)):
        bad = grid[~(env > 0)][0]
        raise InvalidEnvelopeError(f'envelope must be strictly positive, got {env[~(env > 0)][0]!r} at t={bad!r}')

    ratio = np.abs(zeta_dot) / env
    outside = (zeta < 0) | (zeta > np.pi / 2)
    near = ~outside & ((zeta <= guard) | (zeta >= np.pi / 2 - guard))
    steep = ratio > 1 - guard

    violations = []
    for i in np.flatnonzero(outside | near | steep):
        t = float(grid[i])
        if outside[i]:
            violations.append(Violation(t, 'range'))
        if near[i]:
            violations.append(Violation(t, 'divergence-proximity'))
        if steep[i]:
            violations.append(Violation(t, 'slope'))
    if violations:
        logger.debug('series %s: %d admissibility violations, first %s', series, len(violations), violations[0])

    return AdmissibilityReport(
        admissible=not violations,
        min_zeta=float(zeta.min()),
        max_zeta=float(zeta.max()),
        max_slope_ratio=float(ratio.max()),
        violations=tuple(violations),
    )
