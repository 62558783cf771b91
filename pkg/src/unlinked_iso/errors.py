"""Exception hierarchy.

Each family maps to one CLI exit code (config 2, data 3, numeric 4).
"""


class UnlinkedIsoError(Exception):
    exit_code = 1


class ConfigError(UnlinkedIsoError, ValueError):
    exit_code = 2


class DataError(UnlinkedIsoError, ValueError):
    exit_code = 3


class EmptyInputError(DataError):
    pass


class ShapeError(DataError):
    pass


class MonotonicityError(DataError):
    pass


class AmbiguousFitError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


class UnsupportedOperationError(UnlinkedIsoError, TypeError):
    exit_code = 2


class NumericFailure(UnlinkedIsoError, ArithmeticError):
    exit_code = 4


class AccuracyError(NumericFailure):
    pass


class IllPosedError(NumericFailure):
    pass


class DivergenceError(NumericFailure):
    pass
