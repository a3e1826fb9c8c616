"""Exception hierarchy.

Each family maps onto one CLI exit code: input problems exit with 2,
degenerate data with 3 and failed internal cross-checks with 4.
"""
from __future__ import annotations


class MaxIneqError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 4


class InputError(MaxIneqError):
    """Malformed or out-of-contract input."""

    exit_code = 2


class DegeneracyError(MaxIneqError):
    """The data is degenerate in a way the algorithms cannot resolve."""

    exit_code = 3


class InternalError(MaxIneqError):
    """An independent cross-check disagreed with a computed value."""

    exit_code = 4


# -- input ------------------------------------------------------------------
class NonSymmetricGenerator(InputError):
    pass


class WrongKind(InputError):
    pass


class NonPositiveV(InputError):
    pass


class WrongAmbientKind(InputError):
    pass


class WindowTooSmall(InputError):
    pass


class InsufficientSamples(InputError):
    pass


class MissingDoubledAdjacency(InputError):
    pass


class DisjointnessNotDeclared(InputError):
    pass


class InvalidProfile(InputError):
    pass


class ConstantOrbit(InputError):
    pass


class DiagramError(InputError):
    pass


# -- degeneracy -------------------------------------------------------------
class ContinuumCrossing(DegeneracyError):
    pass


class IllConditionedKernel(DegeneracyError):
    pass


class UnresolvableDegeneracy(DegeneracyError):
    pass


class ResonantEllipsoid(DegeneracyError):
    pass


class DegenerateProfile(DegeneracyError):
    pass


# -- internal ---------------------------------------------------------------
class SymplecticDriftExceeded(InternalError):
    pass


class InternalMismatch(InternalError):
    pass


class ClaimViolated(InternalError):
    pass


class CertificateAssertion(InternalError):
    """A post-condition that a passing certificate promises did not hold."""


# -- hypotheses -------------------------------------------------------------
class HypothesisViolated(MaxIneqError):
    """A theorem hypothesis failed; ``certificate`` records which one."""

    exit_code = 1

    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate
