"""Exception types raised across the package."""


class PertDecompError(Exception):
    """Base class for all errors raised by this package."""


class NotHermitian(PertDecompError, ValueError):
    pass


class NotUnitary(PertDecompError, ValueError):
    pass


class ConvergenceFailure(PertDecompError, ArithmeticError):
    pass


class DimensionMismatch(PertDecompError, ValueError):
    pass


class DimensionCapExceeded(PertDecompError, ValueError):
    pass


class SiteOutOfRange(PertDecompError, IndexError):
    pass


class UnsupportedScheme(PertDecompError, ValueError):
    pass


class NearPole(PertDecompError, ArithmeticError):
    """An argument of tan lies inside the guard band around one of its poles.

    ``x`` is the offending argument. ``where`` optionally names the site/bond
    and ``points`` collects every offending grid time when raised by a curve.
    """

    def __init__(self, x, where=None, points=None):
        self.x = x
        self.where = where
        self.points = list(points) if points is not None else []
        msg = f"argument {x!r} is within the pole guard of tan"
        if where:
            msg += f" ({where})"
        if self.points:
            msg += f"; offending t: {self.points}"
        super().__init__(msg)


class BaselineNotCrossed(PertDecompError, ValueError):
    pass


class ParseError(PertDecompError, ValueError):
    pass


class ValidationError(PertDecompError, ValueError):
    pass
