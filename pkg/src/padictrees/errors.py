"""Exception types shared across the package."""


class PadicTreesError(Exception):
    """Base class for all errors raised by this package."""


class PrecisionExhausted(PadicTreesError):
    """The working precision is too small to decide the question."""


class DomainError(PadicTreesError):
    """An argument is outside the domain of the operation."""


class DepthMismatch(PadicTreesError):
    """Two trees with different depth caps were combined."""


class EmptyAttach(PadicTreesError):
    """Attempt to attach an empty tree."""


class LabelMissing(PadicTreesError):
    """A tree operation needed node labels that are not present."""


class NodeBudgetExceeded(PadicTreesError):
    """An enumeration would create more nodes than the configured budget."""


class NonIntegral(PadicTreesError):
    """A linear function evaluated to a non-integer on its domain."""


class NonIntegralExponent(NonIntegral):
    """A telescoped geometric sum produced a non-integer exponent."""


class UnboundedBelow(PadicTreesError):
    """A lattice sum has no lower bound in some coordinate."""


class ParameterOutsideDomain(PadicTreesError):
    """A parameter point does not belong to the datum's domain."""


class PieceNotFound(PadicTreesError):
    """No bone piece covers a required (parameter, depth) point."""


class InvalidDatum(PadicTreesError):
    """A tree datum violates a structural constraint."""


class NotNormal(PadicTreesError):
    """The operation requires a normal (congruence-respecting) datum."""


class DomainNotNonnegative(PadicTreesError):
    """A datum domain leaves the non-negative quadrant."""


class LevelCap(PadicTreesError):
    """Datum recursion level exceeds what this implementation supports."""


class NotLeafless(PadicTreesError):
    """Realization requires a datum whose expansions have no leaves."""


class NotRealizable(PadicTreesError):
    """The datum is outside the scope the realizer supports."""
