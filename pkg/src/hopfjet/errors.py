"""Exception and warning types raised across hopfjet."""


class HopfJetError(Exception):
    """Base class for all hopfjet errors."""


class DimensionMismatchError(HopfJetError, ValueError):
    """Operands live in different jet rings (dimension or cap differ)."""


class ExpressionSyntaxError(HopfJetError, SyntaxError):
    """A polynomial expression could not be parsed."""


class NonGermError(HopfJetError, ValueError):
    """A map component has a nonzero constant term, so 0 is not fixed."""


class SingularLinearPartError(HopfJetError, ValueError):
    """The linear part of a germ is not invertible."""


class NoConvergenceError(HopfJetError, ArithmeticError):
    """Shifted QR iteration exceeded its sweep budget."""


class NotContractionError(HopfJetError, ValueError):
    """Some eigenvalue of the linear part has modulus >= 1 (or is zero)."""


class ResonantInputError(HopfJetError):
    """Linearization was requested for a resonant germ."""

    def __init__(self, message, relations=()):
        super().__init__(message)
        self.relations = list(relations)


class ResonanceObstructionError(HopfJetError):
    """A graded connection equation is singular and inconsistent."""

    def __init__(self, degree, weight=None, defect=None):
        msg = f"resonance obstruction at jet degree {degree}"
        if weight is not None:
            msg += f" (weight {complex(weight):.6g}, defect {defect:.3g})"
        super().__init__(msg)
        self.degree = degree
        self.weight = weight
        self.defect = defect


class SingularCocycleError(HopfJetError, ValueError):
    """The equivariant cocycle is not invertible at the origin."""


class RankMismatchError(HopfJetError, ValueError):
    """Torsion or coframes need a connection on a bundle of rank n."""


class NotFlatError(HopfJetError, ArithmeticError):
    """Curvature is above tolerance; parallel transport is inconsistent."""


class NotClosedError(HopfJetError, ArithmeticError):
    """A 1-form is not closed, so it has no formal antiderivative."""


class NotDiagonalError(HopfJetError, ValueError):
    """Section counting needs a diagonal(izable) linear part."""


class DimensionTooSmallError(HopfJetError, ValueError):
    """Mall's theorem needs n >= 3."""


class IllConditionedWarning(UserWarning):
    """A small divisor fell below 1e-10; results may be inaccurate."""


class ResonantButSolvableWarning(UserWarning):
    """A resonant graded equation happened to be consistent."""
