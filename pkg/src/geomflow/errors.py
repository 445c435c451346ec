"""Exception hierarchy shared by every geomflow module."""


class GeomflowError(Exception):
    """Base class for all library errors."""


class InvalidInputError(GeomflowError, ValueError):
    """Non-finite or malformed field data."""


class UnsupportedOrderError(GeomflowError, ValueError):
    pass


class DegenerateCurveError(GeomflowError, ValueError):
    """A curve violates the genericity condition of its geometry."""


class FrameDegenerateError(DegenerateCurveError):
    """Curvature vanishes, so the Frenet frame (and torsion) is undefined."""


class PreconditionError(GeomflowError, ValueError):
    pass


class UnsolvableError(GeomflowError, ValueError):
    """Right-hand side violates the solvability conditions of an operator.

    ``residual`` is the relative size of the component of the right-hand
    side lying outside the range of the operator.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class SingularOperatorError(GeomflowError, ArithmeticError):
    pass


class BlowUpError(GeomflowError, ArithmeticError):
    """Time stepping produced non-finite values.

    ``last_state`` holds the last finite state (if known).
    """

    def __init__(self, message, last_state=None, step=None):
        super().__init__(message)
        self.last_state = last_state
        self.step = step


class InconsistencyError(GeomflowError, ArithmeticError):
    """A numerical self-check failed by a wide margin."""


class OracleUnreliableError(GeomflowError, ArithmeticError):
    def __init__(self, message, error_bound):
        super().__init__(message)
        self.error_bound = error_bound


class ShapeMismatchError(GeomflowError, ValueError):
    pass


class MissingFieldError(GeomflowError, KeyError):
    pass
