"""Errors raised by the modular forms engine.

Everything derives from ValueError so callers that only know about bad input
(the HTTP routes, the CLI) keep working; ComputationError marks failures that
happen after the arguments were accepted.
"""


class ComputationError(ValueError):
    pass


class ParityError(ComputationError):
    """chi(-1) does not match (-1)^k."""


class NotInSpaceError(ComputationError):
    pass


class PrecisionError(ComputationError):
    pass


class ValuationError(ComputationError):
    """A quotient of series is not a power series."""


class SplittingError(ComputationError):
    pass


class RecognitionError(ComputationError):
    pass
