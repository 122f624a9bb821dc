"""Exception types raised by tenseig."""


class TensorEigError(Exception):
    """Base class for all package errors."""


class SingularMatrix(TensorEigError):
    pass


class NonFinite(TensorEigError, ValueError):
    pass


class NotUnit(TensorEigError, ValueError):
    pass


class SizeMismatch(TensorEigError, ValueError):
    pass


class DimMismatch(TensorEigError, ValueError):
    pass


class DegreeMismatch(TensorEigError, ValueError):
    pass


class SizeGuard(TensorEigError, ValueError):
    pass


class ZeroIterate(TensorEigError):
    pass


class StepFailure(TensorEigError):
    pass


class NotEigenpair(TensorEigError, ValueError):
    pass


class InsufficientTrace(TensorEigError, ValueError):
    pass


class ParseError(TensorEigError, ValueError):
    pass


class AsymmetricInput(ParseError):
    pass


class ConflictingEntries(ParseError):
    pass


class DimNot3(TensorEigError, ValueError):
    pass
