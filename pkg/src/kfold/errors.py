"""Exception types shared across the package."""


class KFoldError(Exception):
    """Base class for package errors."""


class InvalidArgumentError(KFoldError, ValueError):
    pass


class ResourceLimitError(KFoldError):
    """Requested problem exceeds the configured size caps."""


class NotPositiveDefiniteError(KFoldError):
    def __init__(self, min_eigenvalue, message=None):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(message or f"matrix is not positive definite (min eigenvalue {self.min_eigenvalue:.3e})")


class NumericalDegeneracyError(KFoldError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
