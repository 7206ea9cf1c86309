"""Exception hierarchy shared by all modules."""


class LRIsingError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(LRIsingError, ValueError):
    """Invalid user input (bad size, out-of-range parameter, ...)."""


class DomainError(ValidationError):
    """Argument outside the domain of a mathematical function."""


class RegimeError(ValidationError):
    """Operation requested outside the interaction regime where it is defined."""


class UnsupportedDimensionError(ValidationError):
    pass


class SizeLimitError(LRIsingError):
    """A resource cap (enumeration size, search range) was exceeded."""


class NoSolutionError(SizeLimitError):
    """A search reached its cap without finding an admissible answer."""


class NotFoundError(LRIsingError):
    """A root or crossing could not be located below the scan cap."""


class NumericalCheckError(LRIsingError):
    """A runtime consistency check failed."""
