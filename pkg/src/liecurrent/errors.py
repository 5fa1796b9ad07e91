"""Exception types raised across the package."""


class LiecurrentError(Exception):
    """Base class; carries an optional witness object for reports."""

    def __init__(self, message="", witness=None):
        super().__init__(message)
        self.witness = witness


# arithmetic
class InsufficientOrder(LiecurrentError):
    pass


class NonUnitConstantTerm(LiecurrentError):
    pass


class NotDivisible(LiecurrentError):
    pass


# algebras
class UnsupportedType(LiecurrentError):
    pass


class BadLeg(LiecurrentError):
    pass


class ExtensionFailure(LiecurrentError):
    pass


# trace extensions
class DepthExceeded(LiecurrentError):
    pass


class ObstructionNonzero(LiecurrentError):
    pass


# doubles and lagrangian patterns
class DegenerateParameters(LiecurrentError):
    pass


class WindowTooSmall(LiecurrentError):
    pass


class MismatchWitness(LiecurrentError):
    pass


class BadDegree(LiecurrentError):
    pass


class BadConstantTerm(LiecurrentError):
    pass


# r-matrices
class NotPolynomial(LiecurrentError):
    pass


class SingularGram(LiecurrentError):
    pass


# orders
class RankTooLarge(LiecurrentError):
    pass
