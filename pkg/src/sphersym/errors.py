"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Bad configuration: unknown preset, invalid rank/case combination, malformed config."""


class DomainError(ValueError):
    """Evaluation outside a chart's coordinate box or below a radial function's domain."""


class GeometryError(RuntimeError):
    """A matrix that must be symmetric positive definite is not."""


class CapabilityError(RuntimeError):
    """Requested data or mode is unavailable: missing gradient closure, derivative
    order beyond what a profile carries, or a connection the check does not support."""
