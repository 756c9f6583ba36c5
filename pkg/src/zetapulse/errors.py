class ZetaPulseError(Exception):
    """Base class for every error raised by zetapulse."""


class DomainError(ZetaPulseError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidEnvelopeError(DomainError):
    """A sigma-z envelope sample is zero or negative."""


class EnvelopeSignError(DomainError):
    """The effective sigma-x/y envelope vanishes or changes sign."""


class SquareRootDomainError(DomainError):
    """|zeta_dot| reached the envelope, so sqrt(1 - zeta_dot^2 / W^2) is not real."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class DivergenceError(DomainError):
    """zeta came within the guard of 0 or pi/2, where cot(2 zeta) and csc(2 zeta) diverge."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class ContractViolation(ZetaPulseError, ValueError):
    """A result broke an invariant: non-Hermitian sample, unitarity defect out of tolerance."""


class QuadratureError(ZetaPulseError):
    """Composite Simpson refinement ran out of intervals before converging."""


class CalibrationError(ZetaPulseError):
    """Bracketed root finding failed. `diagnostics` holds the bracket and objective values."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BracketError(CalibrationError):
    """The objective has no sign change over the bracket."""


class ScenarioError(ZetaPulseError, ValueError):
    """Malformed scenario configuration."""
