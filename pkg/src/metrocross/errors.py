"""Exception hierarchy shared by all metrocross modules."""


class MetrocrossError(Exception):
    """Base class for every error raised by this package."""


class NonHermitianInput(MetrocrossError, ValueError):
    pass


class NotPSD(MetrocrossError, ValueError):
    pass


class DimensionMismatch(MetrocrossError, ValueError):
    pass


class ParamOutOfRange(MetrocrossError, ValueError):
    pass


class NotCPTP(MetrocrossError, ValueError):
    pass


class UnknownChannelKind(MetrocrossError, ValueError):
    pass


class SingularEigenvalue(MetrocrossError, ArithmeticError):
    """An eigenvalue vanishes while its derivative does not."""


class BadLength(MetrocrossError, ValueError):
    pass


class OptimizerFailure(MetrocrossError, RuntimeError):
    pass


class NoSignChange(MetrocrossError, ValueError):
    """The QFI difference of two strategies does not change sign on the bracket."""


class UnsupportedStrategy(MetrocrossError, ValueError):
    pass
