__version__ = '0.1.0'


from .analytic import (
    XiPair,
    boundary_gate,
    delta_from_zeta,
    landau_zener_return,
    omega_prime_from_zeta,
    printed_elements,
    propagator_xy,
    propagator_z,
    pulse_area,
    transformed_hamiltonian,
    xi_integrals,
)
from .controls import Axis, ControlProblem, Envelope, Phase
from .designer import (
    GateReport,
    PulseSchedule,
    build_st_gate,
    calibrate_scalar,
    clifford_table,
    design_individual_control,
    j_from_zeta,
    smooth_endpoints,
    synthesize_schedule,
)
from .errors import (
    BracketError,
    CalibrationError,
    ContractViolation,
    DivergenceError,
    DomainError,
    EnvelopeSignError,
    InvalidEnvelopeError,
    QuadratureError,
    ScenarioError,
    SquareRootDomainError,
    ZetaPulseError,
)
from .metrics import FidelityScore, gate_fidelity, phase_aligned_distance, state_fidelity
from .oracle import HamiltonianSampler, evolve_state, propagate_converged, propagate_numeric
from .scenario import Scenario, load_scenario, run_scenario
from .serialize import dumps, loads
from .unitary import Unitary2
from .zeta import AdmissibilityReport, Term, ZetaSeries, check_admissible, eval_zeta

__all__ = (
    '__version__',
    'AdmissibilityReport',
    'Axis',
    'BracketError',
    'CalibrationError',
    'ContractViolation',
    'ControlProblem',
    'DivergenceError',
    'DomainError',
    'Envelope',
    'EnvelopeSignError',
    'FidelityScore',
    'GateReport',
    'HamiltonianSampler',
    'InvalidEnvelopeError',
    'Phase',
    'PulseSchedule',
    'QuadratureError',
    'Scenario',
    'ScenarioError',
    'SquareRootDomainError',
    'Term',
    'Unitary2',
    'XiPair',
    'ZetaPulseError',
    'ZetaSeries',
    'boundary_gate',
    'build_st_gate',
    'calibrate_scalar',
    'check_admissible',
    'clifford_table',
    'delta_from_zeta',
    'design_individual_control',
    'dumps',
    'eval_zeta',
    'evolve_state',
    'gate_fidelity',
    'j_from_zeta',
    'landau_zener_return',
    'load_scenario',
    'loads',
    'omega_prime_from_zeta',
    'phase_aligned_distance',
    'printed_elements',
    'propagate_converged',
    'propagate_numeric',
    'propagator_xy',
    'propagator_z',
    'pulse_area',
    'run_scenario',
    'smooth_endpoints',
    'state_fidelity',
    'synthesize_schedule',
    'transformed_hamiltonian',
    'xi_integrals',
)
