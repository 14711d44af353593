"""Exception types raised by the library."""


class WillmoreError(Exception):
    """Base class for all library errors."""


class UnsupportedOrderError(WillmoreError):
    """Requested jet order exceeds what is available or allowed."""


class DomainError(WillmoreError, ValueError):
    """A parameter point or argument lies outside its admissible domain."""


class ParameterError(WillmoreError, ValueError):
    """Family parameters violate a stated constraint."""


class DegeneracyError(WillmoreError):
    """The induced metric is numerically degenerate at a node."""


class UnsupportedError(WillmoreError):
    """The requested combination (dimension, background, family) is not covered."""


class MapSingularityError(WillmoreError):
    """An ambient map would be evaluated too close to its singular set."""
