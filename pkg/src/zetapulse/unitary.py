from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

UNITARITY_TOL = 1e-9

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def defect(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=complex)
    return float(np.linalg.norm(m.conj().T @ m - IDENTITY))


@dataclass(frozen=True)
class Unitary2:
    """
    A 2x2 unitary [[u11, u12], [u21, u22]].

    Construction fails when ||U^dagger U - I||_F reaches the tolerance.
    """

    u11: complex
    u12: complex
    u21: complex
    u22: complex
    tol: float = UNITARITY_TOL

    def __post_init__(self):
        for name in ('u11', 'u12', 'u21', 'u22'):
            object.__setattr__(self, name, complex(getattr(self, name)))
        d = defect(self.matrix)
        if not d < self.tol:
            raise ContractViolation(f'unitarity defect {d:.3e} exceeds {self.tol:.1e}')

    @classmethod
    def from_matrix(cls, m, tol: float = UNITARITY_TOL) -> 'Unitary2':
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ContractViolation(f'expected a 2x2 matrix, got shape {m.shape}')
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1], tol=tol)

    @classmethod
    def su2(cls, u11: complex, u21: complex) -> 'Unitary2':
        """Canonical form [[u11, -conj(u21)], [u21, conj(u11)]]."""
        return cls(u11, -np.conj(u21), u21, np.conj(u11))

    @classmethod
    def identity(cls) -> 'Unitary2':
        return cls(1, 0, 0, 1)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.u11, self.u12], [self.u21, self.u22]], dtype=complex)

    @property
    def defect(self) -> float:
        return defect(self.matrix)

    def is_su2_form(self, tol: float = 1e-12) -> bool:
        return (
            abs(self.u22 - np.conj(self.u11)) < tol
            and abs(self.u12 + np.conj(self.u21)) < tol
            and abs(abs(self.u11) ** 2 + abs(self.u21) ** 2 - 1) < tol
        )

    def dagger(self) -> 'Unitary2':
        return Unitary2.from_matrix(self.matrix.conj().T, tol=self.tol)

    def __matmul__(self, other: 'Unitary2') -> 'Unitary2':
        if not isinstance(other, Unitary2):
            return NotImplemented
        return Unitary2.from_matrix(self.matrix @ other.matrix, tol=max(self.tol, other.tol))

    def to_dict(self) -> dict:
        m = self.matrix
        return {'re': m.real.tolist(), 'im': m.imag.tolist()}


def pauli_components(h: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Split stacked Hermitian 2x2 matrices into (a0, ax, ay, az) with H = a0 I + a . sigma."""
    a0 = 0.5 * (h[..., 0, 0] + h[..., 1, 1]).real
    az = 0.5 * (h[..., 0, 0] - h[..., 1, 1]).real
    ax = h[..., 1, 0].real
    ay = h[..., 1, 0].imag
    return a0, ax, ay, az


def expm_su2(h: np.ndarray, dt: float | np.ndarray) -> np.ndarray:
    """
    exp(-i H dt) for stacked Hermitian 2x2 matrices, in closed form:

        e^{-i a0 dt} (cos(|a| dt) I - i sin(|a| dt) a_hat . sigma)
    """
    h = np.asarray(h, dtype=complex)
    a0, ax, ay, az = pauli_components(h)
    norm = np.sqrt(ax**2 + ay**2 + az**2)
    dt = np.asarray(dt, dtype=float)
    c = np.cos(norm * dt)
    # sin(|a| dt) / |a|, finite at |a| = 0
    k = dt * np.sinc(norm * dt / np.pi)
    out = np.empty(h.shape, dtype=complex)
    out[..., 0, 0] = c - 1j * k * az
    out[..., 1, 1] = c + 1j * k * az
    out[..., 0, 1] = -1j * k * (ax - 1j * ay)
    out[..., 1, 0] = -1j * k * (ax + 1j * ay)
    return np.exp(-1j * a0 * dt)[..., None, None] * out


def rotation(axis: tuple[float, float, float], angle: float) -> Unitary2:
    """exp(-i angle/2 n . sigma) for a unit axis n."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    generator = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
    return Unitary2.from_matrix(np.cos(angle / 2) * IDENTITY - 1j * np.sin(angle / 2) * generator)


def rx(angle: float) -> Unitary2:
    return rotation((1, 0, 0), angle)


def rz(angle: float) -> Unitary2:
    return rotation((0, 0, 1), angle)


HADAMARD = Unitary2.from_matrix(np.array([[1, 1], [1, -1]]) / np.sqrt(2))
NOT = Unitary2.from_matrix(SIGMA_X)
S_GATE = Unitary2.from_matrix(np.diag([1, 1j]))
T_GATE = Unitary2.from_matrix(np.diag([1, np.exp(1j * np.pi / 4)]))
