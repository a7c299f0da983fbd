"""Exception hierarchy for eos-lab.

Library code raises these; only the CLI turns them into process exit codes.
Domain errors also derive from ValueError so plain ``except ValueError``
handlers keep working.
"""
from typing import Optional


class EosLabError(Exception):
    """Base class for every error raised by the library."""

    exit_code: int = 1


class ConfigError(EosLabError):
    """Malformed or invalid run configuration."""

    exit_code = 1

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class NumericalWindowError(EosLabError):
    """A numerical window, node budget or truncation was insufficient."""

    exit_code = 2


class EnvelopeRefusal(EosLabError):
    """The brute-force oracle refuses to run outside its validated envelope."""

    exit_code = 3


class DomainError(EosLabError, ValueError):
    exit_code = 1


# phase_space
class OrderingOutOfRange(DomainError):
    pass


class GridMismatch(DomainError):
    pass


class InvalidState(DomainError):
    pass


class WindowTooSmall(NumericalWindowError):
    def __init__(self, message: str, boundary_mass: float = float("nan")):
        self.boundary_mass = boundary_mass
        super().__init__(message)


# skellam
class NonFiniteParams(DomainError):
    pass


class ApproximationDomain(DomainError):
    pass


# eos_core
class EmptySetup(DomainError):
    pass


class ZeroPump(DomainError):
    pass


class UnsupportedConfiguration(DomainError):
    pass


class PartitionViolation(DomainError):
    pass


class QuadratureNonConvergent(NumericalWindowError):
    pass


class NegativeProbability(NumericalWindowError):
    pass


# post_measurement
class VanishingOutcomeProbability(DomainError):
    pass


class DegeneratePartition(DomainError):
    pass


class ChainMassLoss(NumericalWindowError):
    pass


# reconstruction
class ZeroEvidence(DomainError):
    pass


class TruncationOverflow(NumericalWindowError):
    pass


class NonPureInitial(DomainError):
    pass


class UnsupportedFamily(DomainError):
    pass


# fock_oracle
class TruncationBreach(EnvelopeRefusal):
    pass


class OracleEnvelopeExceeded(EnvelopeRefusal):
    pass
