"""Exception types shared across the package."""


class HolonomyError(Exception):
    """Base class for all errors raised by holonomy_lab."""


# --- geometry ---------------------------------------------------------------

class NonClosedPath(HolonomyError):
    """A closed path was required but endpoint != start point."""


class PointOnPath(HolonomyError):
    """The query point lies on (or within guard distance of) the curve."""


class NonContiguous(HolonomyError):
    """Concatenated path pieces do not share endpoints."""


class NonFinite(HolonomyError):
    """A computation produced NaN or infinity."""


# --- connections / transport ------------------------------------------------

class PoleProximity(HolonomyError):
    """Evaluation point is within the hard guard radius of a puncture."""


class PoleProximityWarning(UserWarning):
    """Evaluation point is uncomfortably close to a puncture (soft guard)."""


class NoConvergence(HolonomyError):
    """Adaptive refinement exceeded the step budget without converging."""


class DimensionMismatch(HolonomyError):
    """Matrix or vector dimensions are inconsistent."""


class FlatnessUnverified(HolonomyError):
    """Monodromy requested for a connection whose flatness is not known.

    Pass assume_flat=True (CLI: --assume-flat) to acknowledge that a
    user-supplied connection is flat.
    """


# --- monodromy / representations ---------------------------------------------

class DegenerateConfiguration(HolonomyError):
    """Punctures/basepoint too close together for disjoint generator loops."""


class NonCommutingResidues(HolonomyError):
    """The closed-form abelian monodromy formula needs commuting residues."""


class UnknownLabel(HolonomyError):
    """A loop word references a generator label missing from the representation."""


# --- wong ---------------------------------------------------------------------

class BasisMismatch(HolonomyError):
    """A matrix does not lie in the span of the given Lie-algebra basis."""


# --- vacua ----------------------------------------------------------------------

class NotUnitary(HolonomyError):
    """Matrix fails the unitarity test at the requested tolerance."""


class NotInvolution(HolonomyError):
    """Matrix does not square to the identity at the requested tolerance."""


class Singular(HolonomyError):
    """Matrix inversion requested for a (numerically) singular matrix."""


# --- cli -------------------------------------------------------------------------

class ParseError(HolonomyError):
    """Config text could not be parsed; carries the offending location."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class ValidationError(HolonomyError):
    """Config parsed but failed validation; carries the offending key."""

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line
