"""Exception types shared across the package."""


class FreeSteinError(Exception):
    """Base class for all errors raised by this package."""


class StructureError(FreeSteinError):
    """Operands belong to incompatible generator systems or algebras."""


class DegreeCapError(FreeSteinError):
    """A symbolic operation would exceed the configured degree cap."""


class ModelError(FreeSteinError):
    """A trace model is malformed or cannot evaluate the requested word."""


class ParseError(FreeSteinError):
    """Polynomial text could not be parsed.

    Carries the character position of the offending token.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class QuadratureError(FreeSteinError):
    """Adaptive quadrature failed to converge to the requested tolerance."""
