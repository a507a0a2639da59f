"""Exception types raised across the package."""


class ParameterError(ValueError):
    """A model or run parameter violates its documented constraints."""


class DivergentSeriesError(ParameterError):
    """An infinite-depth coupling sum was requested where it diverges."""


class DepthCapError(ParameterError):
    """Requested depth exceeds the configured cost cap of an exact method."""


class QuadratureError(RuntimeError):
    """Two quadrature resolutions disagree beyond the accepted tolerance."""
