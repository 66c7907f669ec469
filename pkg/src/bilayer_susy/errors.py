"""Exception types raised across the package."""


class SusyError(Exception):
    """Base class for all package errors."""


class InvalidArgument(SusyError, ValueError):
    pass


class ConvergenceFailure(SusyError, ArithmeticError):
    pass


class ParameterPole(SusyError, ArithmeticError):
    pass


class DomainError(SusyError, ValueError):
    pass


class NoSuchLevel(SusyError, ValueError):
    pass


class TransformSingular(SusyError, ValueError):
    pass


class SingularPoint(SusyError, ArithmeticError):
    """Raised when a formula divides by a vanishing eta.

    ``locations`` holds the offending abscissae.
    """

    def __init__(self, message, locations=()):
        super().__init__(message)
        self.locations = list(locations)


class RelationInconsistent(SusyError, ArithmeticError):
    pass


class NoBranch(SusyError, ValueError):
    pass


class ClosedFormUnavailable(SusyError, NotImplementedError):
    pass
