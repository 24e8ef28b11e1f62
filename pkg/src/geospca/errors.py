"""Exception hierarchy shared by every solver in the package."""


class GeoSPCAError(Exception):
    """Base class for all package errors."""


class NonFiniteInput(GeoSPCAError, ValueError):
    pass


class EmptySupport(GeoSPCAError, ValueError):
    pass


class Infeasible(GeoSPCAError):
    """Every candidate support is excluded by the current cuts."""


class CutBudgetExceeded(GeoSPCAError):
    pass


class NodeLimitExceeded(GeoSPCAError):
    """Branch-and-bound hit its node limit before proving optimality."""


class TooLarge(GeoSPCAError):
    pass


class EmptyPatternSet(GeoSPCAError, ValueError):
    pass


class ParseError(GeoSPCAError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class ShapeError(GeoSPCAError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(message if line is None else f"{message} (line {line})")
