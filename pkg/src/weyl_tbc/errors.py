"""Exception hierarchy shared by all modules."""


class WeylTBCError(Exception):
    """Base class for every error raised by the package."""


class NumericalError(WeylTBCError):
    """A numerical routine failed (CLI exit code 2)."""


class StepLimitExceeded(NumericalError):
    pass


class NoSignChange(NumericalError):
    pass


class LengthMismatch(WeylTBCError, ValueError):
    pass


class GridMismatch(WeylTBCError, ValueError):
    pass


class PotentialEvalError(WeylTBCError, ValueError):
    pass


class OutOfDomain(PotentialEvalError):
    """Tabulated potential queried outside its knot range."""


class SchemaError(WeylTBCError, ValueError):
    pass


class InvariantViolation(WeylTBCError, ValueError):
    pass


class PoleDetected(NumericalError):
    """The m-function (or a closed form) has a pole at the requested point."""


class EvaluatorFailure(NumericalError):
    pass


class NotRegularPoint(NumericalError):
    """The TBC boundary-value problem is singular at this spectral parameter."""


class SingularSystem(NumericalError):
    pass


class ConfigError(WeylTBCError, ValueError):
    pass
