"""Exception hierarchy shared across the package."""


class AsymfluxError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateMetricError(AsymfluxError):
    """Metric matrix is singular or not positive definite."""


class ChartMismatchError(AsymfluxError):
    """Objects evaluated in incompatible charts or at different points."""


class DomainError(AsymfluxError):
    """Point outside the domain of a metric or field (excised region, r=0, ...)."""


class ZeroMassError(AsymfluxError):
    """Center of mass requested for a metric with vanishing mass."""


class QuadratureError(AsymfluxError):
    """Integration failed (non-finite integrand, unsupported rule, ...)."""


class ExtrapolationError(AsymfluxError):
    """Radial series unfit for extrapolation (too few samples, bad radii)."""


class ExprError(AsymfluxError):
    """Base class for expression-language errors; carries a byte offset."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class ParseError(ExprError):
    """Syntax error while parsing an expression."""


class UnknownIdentifierError(ExprError):
    """Expression references a variable or parameter not in scope."""


class ExprDomainError(ExprError):
    """Evaluation hit a domain error (log/sqrt of negative, division by zero)."""


class ConfigError(AsymfluxError):
    """Invalid run configuration."""
