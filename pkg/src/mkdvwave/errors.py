"""Exception hierarchy shared by all modules."""


class MkdvError(Exception):
    """Base class for every error raised by the package."""


class ParameterError(MkdvError, ValueError):
    pass


class NonPositiveN(ParameterError):
    pass


class NonPositiveSpeed(ParameterError):
    pass


class NegativeEps(ParameterError):
    pass


class EnergyOutOfRange(MkdvError, ValueError):
    def __init__(self, h, lo=0.0, hi=None):
        self.h = h
        msg = f"energy h={h!r} outside ({lo}, {hi})"
        super().__init__(msg)


class DomainViolation(MkdvError, ValueError):
    pass


class SingularFastField(MkdvError, ValueError):
    pass


class CenterSingularity(MkdvError, ValueError):
    pass


class NumericalError(MkdvError, ArithmeticError):
    """Base for failures of the numerical kernels (CLI exit code 3)."""


class NoSignChange(NumericalError):
    pass


class MaxIterations(NumericalError):
    pass


class NonConvergent(NumericalError):
    pass


class NegativeRadicand(NumericalError):
    pass


class StepUnderflow(NumericalError):
    pass


class BlowUp(NumericalError):
    pass


class PeriodNotFound(NumericalError):
    pass


class NoReturn(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class NoCycle(NumericalError):
    pass


class SpeedUndefined(NumericalError):
    pass
