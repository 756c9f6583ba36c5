from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ContractViolation, DomainError
from .unitary import Unitary2, defect

NORM_TOL = 1e-9
GATE_DEFECT_TOL = 1e-6


@dataclass(frozen=True)
class FidelityScore:
    value: float
    kind: Literal['gate', 'state']

    def __post_init__(self):
        if not -1e-12 <= self.value <= 1 + 1e-12:
            raise ContractViolation(f'{self.kind} fidelity {self.value!r} outside [0, 1]')

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> dict:
        return {'value': self.value, 'kind': self.kind}


def _as_matrix(u: Unitary2 | np.ndarray) -> np.ndarray:
    if isinstance(u, Unitary2):
        return u.matrix
    return np.asarray(u, dtype=complex)


def _as_state(psi, name: str) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape != (2,):
        raise DomainError(f'{name} must have two components, got shape {psi.shape}')
    norm = np.linalg.norm(psi)
    if abs(norm - 1) > NORM_TOL:
        raise DomainError(f'{name} is not normalized (norm {norm:.12f})')
    return psi


def state_fidelity(psi, target) -> FidelityScore:
    """|<target|psi>|^2 for normalized two-component states."""
    psi = _as_state(psi, 'psi')
    target = _as_state(target, 'target')
    return FidelityScore(float(abs(np.vdot(target, psi)) ** 2), 'state')


def unitarity_defect(u: Unitary2 | np.ndarray) -> float:
    """||u^dagger u - I||_F."""
    return defect(_as_matrix(u))


def gate_fidelity(u: Unitary2 | np.ndarray, v: Unitary2 | np.ndarray) -> FidelityScore:
    """Projective trace fidelity |Tr(u^dagger v)|^2 / 4; insensitive to a global phase."""
    u, v = _as_matrix(u), _as_matrix(v)
    for name, m in (('u', u), ('v', v)):
        d = defect(m)
        if not d < GATE_DEFECT_TOL:
            raise ContractViolation(f'{name} has unitarity defect {d:.3e}')
    value = abs(np.trace(u.conj().T @ v)) ** 2 / 4
    return FidelityScore(float(min(value, 1.0)), 'gate')


def phase_aligned_distance(u: Unitary2 | np.ndarray, v: Unitary2 | np.ndarray) -> float:
    """min over gamma of ||u - e^{i gamma} v||_F, attained at gamma = arg Tr(v^dagger u)."""
    u, v = _as_matrix(u), _as_matrix(v)
    overlap = np.trace(v.conj().T @ u)
    gamma = np.angle(overlap) if abs(overlap) > 0 else 0.0
    return float(np.linalg.norm(u - np.exp(1j * gamma) * v))


def phase_equivalent(u: Unitary2 | np.ndarray, v: Unitary2 | np.ndarray, tol: float = 1e-9) -> bool:
    return phase_aligned_distance(u, v) < tol
