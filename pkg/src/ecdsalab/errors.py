"""Exception types shared across the package."""


class EcdsaLabError(Exception):
    """Base class for all errors raised by ecdsalab."""


class NotInvertible(EcdsaLabError, ArithmeticError):
    pass


class UnknownCurve(EcdsaLabError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class PointNotOnCurve(EcdsaLabError, ValueError):
    pass


class CurveTooLarge(EcdsaLabError, ValueError):
    pass


class NotFound(EcdsaLabError):
    pass


class DegenerateSignature(EcdsaLabError):
    """A deterministic nonce policy produced r == 0 or s == 0."""


class WrongNonce(EcdsaLabError):
    pass


class PreconditionFailed(EcdsaLabError):
    pass


class SingularSystem(EcdsaLabError):
    pass


class ValidationFailed(EcdsaLabError):
    """A recovered candidate did not match the victim public key."""


class DependentRows(EcdsaLabError, ValueError):
    pass


class BadBound(EcdsaLabError, ValueError):
    pass
