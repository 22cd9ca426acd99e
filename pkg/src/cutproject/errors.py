"""Exception types shared across the package."""


class CutProjectError(Exception):
    """Base class for all package-specific failures."""


class FieldMismatchError(CutProjectError):
    """Arithmetic attempted between scalars from different quadratic fields."""


class RankDeficientError(CutProjectError):
    """Generators were required to be independent but are not."""


class NoComplementError(CutProjectError):
    """A direct-sum complement was requested for a non-saturated sublattice."""


class DegenerateDecompositionError(CutProjectError):
    """A claimed direct sum of subspaces fails to span, so the oblique
    projection is undefined."""


class NotFundamentalDomainError(CutProjectError):
    """The window does not cut out a fundamental domain of the right volume
    for the requested sublattice."""


class SingularOffsetError(CutProjectError):
    """A lattice point landed exactly on a window facet where the window
    construction promised that cannot happen."""


class BoundaryAmbiguousError(CutProjectError):
    """Floating-point mode only: a membership decision fell within the
    configured margin of a facet and cannot be trusted."""


class PrecisionExhaustedError(BoundaryAmbiguousError):
    """Floating-point mode only: a hit decision was closer to a facet than
    the precision budget allows, so the run aborts instead of guessing."""


class RegionError(CutProjectError):
    """A patch region is malformed or does not bound a finite enumeration."""


class DecompositionError(CutProjectError):
    """A computed piece family fails its disjoint-cover validation."""
