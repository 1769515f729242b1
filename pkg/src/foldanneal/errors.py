"""Exception types shared across the toolkit."""


class FoldAnnealError(Exception):
    """Base class for all toolkit errors."""


class InvalidTurnCode(FoldAnnealError):
    """A 3D turn code maps to no lattice direction (codes 110 and 111)."""


class NotSelfAvoiding(FoldAnnealError):
    """Operation requires a self-avoiding walk."""


class TooLarge(FoldAnnealError):
    """Problem size exceeds the documented enumeration or memory guard."""


class ParseError(FoldAnnealError):
    """A data file does not match its documented format."""


class AsymmetricMatrix(ParseError):
    """Contact-energy table is not exactly symmetric."""


class PositiveEntry(ParseError):
    """Contact-energy table contains a non-negative entry."""


class MissingAminoAcid(ParseError):
    """Contact-energy table header does not cover the 20 standard residues."""


class UnknownAminoAcid(FoldAnnealError):
    """Residue code outside the 20 standard one-letter codes."""


class MissingVariable(FoldAnnealError):
    """Polynomial evaluation with an assignment that omits a variable."""


class DimensionMismatch(FoldAnnealError):
    """Vector length does not match the operator dimension."""


class NoConvergence(FoldAnnealError):
    """Iterative eigensolver failed to converge within its restart budget."""


class NormDriftExceeded(FoldAnnealError):
    """State norm drifted beyond tolerance during time evolution."""


class StepUnderflow(FoldAnnealError):
    """Adaptive integrator step size collapsed below the resolvable scale."""


class ZeroProbability(FoldAnnealError):
    """Success probability is zero, so time-to-solution is unbounded."""


class NonPositiveValue(FoldAnnealError):
    """Scaling fits operate on log values and need strictly positive data."""


class DegenerateDesign(FoldAnnealError):
    """Fewer than two distinct abscissae; scaling fit is underdetermined."""


class TooFewSamples(FoldAnnealError):
    """Not enough records for the requested statistic."""
