class TfobiError(Exception):
    """Base class for errors raised by this package."""


class ParseError(TfobiError, ValueError):
    """Malformed input file. Carries the offending line and column when known."""

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


class NumericalError(TfobiError, ArithmeticError):
    """A numerical routine failed (non-convergence, singular system)."""


class SingularCovarianceError(NumericalError):
    """A covariance matrix is not (numerically) positive definite."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class IdentifiabilityError(TfobiError, ValueError):
    """Tied kurtosis values make the requested quantity undefined."""


class IdentifiabilityWarning(UserWarning):
    """Near-tied eigenvalues; the affected components are poorly identified."""
