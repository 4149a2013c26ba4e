"""Exception types shared across the package."""


class GroupTestError(ValueError):
    """Base class for all errors raised by grouptest."""


class NotAGroup(GroupTestError):
    pass


class OrderCapExceeded(GroupTestError):
    pass


class GroupMismatch(GroupTestError):
    pass


class ShapeMismatch(GroupTestError):
    pass


class DimMismatch(ShapeMismatch):
    pass


class GroupTooLarge(GroupTestError):
    pass


class NumericalFailure(GroupTestError, ArithmeticError):
    pass


class IncompatibleFamily(GroupTestError):
    pass


class FormatError(GroupTestError):
    """Malformed input file. ``line`` is 1-based, or None when not line-specific."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
