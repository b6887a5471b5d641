"""Semantic exception hierarchy for the package."""


class FairRegressionError(Exception):
    """Base class for all package errors."""


class ParameterError(FairRegressionError):
    """Model parameters violate the constraint set or a precondition."""


class DimensionError(FairRegressionError):
    """Shapes of inputs do not match the declared (d, M)."""


class DegenerateDirectionError(FairRegressionError):
    """A group coefficient vector has zero norm; its direction is undefined."""


class SingularMatrixError(FairRegressionError):
    """A Gram matrix is numerically singular (condition estimate > 1e12)."""


class ConfigError(FairRegressionError):
    """A sweep / CLI configuration is invalid."""
