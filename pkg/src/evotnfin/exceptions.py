"""Exception hierarchy shared by all evotnfin modules."""


class TnfinError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class ConfigError(TnfinError, ValueError):
    exit_code = 2


class DataError(TnfinError, ValueError):
    """Problems with the data handed to a model or read from disk."""

    exit_code = 3


class InputShapeError(DataError):
    pass


class EmptyDatasetError(DataError):
    pass


class InputFormatError(DataError):
    pass


class DegenerateImageError(DataError):
    pass


class StratificationError(DataError):
    pass


class NumericError(TnfinError, ArithmeticError):
    exit_code = 4


class DegenerateInputError(NumericError):
    """Total rule firing fell below the degeneracy threshold."""


class DivergenceError(NumericError):
    def __init__(self, epoch, value):
        super().__init__(f"loss became non-finite ({value}) at epoch {epoch}")
        self.epoch = epoch
        self.value = value


class EvaluationError(NumericError):
    pass
