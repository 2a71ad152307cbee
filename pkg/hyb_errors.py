"""
HYB - Error taxonomy

Every failure raised by the simulation modules derives from SimulationError.
The `status` attribute is what the sweep engine writes into the status
column when a grid point fails; the CLI maps the two top-level families to
exit codes (ConfigError -> 2, physics/numerical errors -> 3).
"""
from typing import Optional


class SimulationError(Exception):
    """Base class for all simulation failures"""

    status = "error"


class DimensionError(SimulationError, ValueError):
    """Operators, states or spaces do not fit together"""

    status = "dimension_mismatch"


class ConfigError(SimulationError, ValueError):
    """Experiment configuration could not be parsed or validated"""

    status = "config_error"


class PhysicsDomainError(SimulationError, ValueError):
    """Input lies outside the regime where the model is defined"""

    status = "domain_error"


class UnstableRegimeError(PhysicsDomainError):
    """
    Linearized coupling beyond the critical point (G > G_c)

    `magnitude` is |omega_minus^2|, the size of the imaginary frequency
    squared that the unstable quadratic form would have.
    """

    status = "unstable"

    def __init__(self, message: str, magnitude: Optional[float] = None):
        super().__init__(message)
        self.magnitude = magnitude


class SingularCouplingError(PhysicsDomainError):
    """Spin-polariton couplings diverge (omega_minus at or too close to 0)"""

    status = "singular"


class CouplingRangeError(PhysicsDomainError):
    """Requested coupling/frequency is not reachable (e.g. negative G)"""

    status = "out_of_range"


class DispersiveRegimeError(PhysicsDomainError):
    """zeta = lambda_plus/|delta| >= 1: dispersive reduction is meaningless"""

    status = "non_dispersive"


class TruncationError(PhysicsDomainError):
    """Fock truncation too small for the requested state or occupation"""

    status = "truncation"


class ConvergenceError(PhysicsDomainError):
    """Mean-field fixed point did not converge on the g=0 connected branch"""

    status = "no_convergence"


class InvalidStateError(SimulationError, ValueError):
    """Matrix is not a valid density matrix, or vector not normalized"""

    status = "invalid_state"


class NumericalError(SimulationError, RuntimeError):
    """Integrator or linear-algebra failure"""

    status = "numerical"


class TraceDriftError(NumericalError):
    """Trace of the density matrix drifted beyond the abort threshold"""

    status = "trace_drift"


__all__ = [
    'SimulationError', 'DimensionError', 'ConfigError', 'PhysicsDomainError',
    'UnstableRegimeError', 'SingularCouplingError', 'CouplingRangeError',
    'DispersiveRegimeError', 'TruncationError', 'ConvergenceError',
    'InvalidStateError', 'NumericalError', 'TraceDriftError',
]
