"""Exception hierarchy shared by all modules.

The CLI maps ``InvalidInputError`` to exit code 2 and every
``NumericalError`` subclass to exit code 3.
"""


class FuplabError(Exception):
    pass


class InvalidInputError(FuplabError, ValueError):
    pass


class NumericalError(FuplabError, RuntimeError):
    pass


class ConstructionError(NumericalError):
    """Raised when the Cantor embedding finds no free child at some node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class ConvergenceError(NumericalError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ResourceError(NumericalError):
    pass


class ReductionError(NumericalError):
    pass


class WitnessError(NumericalError):
    pass
