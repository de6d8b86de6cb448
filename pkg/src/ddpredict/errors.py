class NumericalError(ArithmeticError):
    """Base for failures caused by the numbers rather than the arguments."""


class NonFiniteError(NumericalError):
    pass


class RankDeficientError(NumericalError):
    pass


class MaxIterationsWarning(RuntimeWarning):
    pass
