"""Exception and warning types shared across the simulator."""


class RabiSimError(Exception):
    """Base class for all simulator errors."""


class TruncationTooSmall(RabiSimError):
    """Initial-state tail mass beyond the Fock cutoff exceeds the tolerance."""

    def __init__(self, tail_mass, tail_tol, q1):
        self.tail_mass = tail_mass
        self.tail_tol = tail_tol
        self.q1 = q1
        super().__init__(
            f"tail mass {tail_mass:.3e} beyond Q1={q1} exceeds tolerance {tail_tol:.1e}"
        )


class DegenerateState(RabiSimError):
    """State parameters make the requested state identically zero."""


class HermiteZeroEncountered(RabiSimError):
    """Hermite-ratio recursion hit an exact polynomial zero and direct
    evaluation could not recover it."""


class DimensionMismatch(RabiSimError):
    """Operands built for different truncations."""


class LengthMismatch(RabiSimError):
    """Packed vector has the wrong length."""


class HermiticityViolation(RabiSimError):
    """Input coefficient blocks are not Hermitian-consistent."""


class EigenFailure(RabiSimError):
    """Dense eigensolver failed to converge."""


class ZeroProbability(RabiSimError):
    """Post-selection outcome has (numerically) zero probability."""


class IntegratorFailure(RabiSimError):
    """Adaptive integration could not complete."""


class StepUnderflow(IntegratorFailure):
    """Required step size fell below the configured minimum."""


class MaxStepsExceeded(IntegratorFailure):
    """Step budget exhausted before reaching the end of the grid."""


class ParseError(RabiSimError):
    """Scenario config document could not be parsed."""


class ValidationError(RabiSimError):
    """Scenario config parsed but contains invalid or unknown entries."""


class PositivityBreach(UserWarning):
    """Reconstructed density matrix developed a negative eigenvalue beyond
    the diagnostic threshold (warning, not fatal)."""


class TruncationNotConverged(UserWarning):
    """Boundary Fock population grew above the tail policy during evolution."""
