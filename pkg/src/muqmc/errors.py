"""Exception hierarchy shared by all muqmc modules."""


class MuqmcError(Exception):
    """Base class for every error raised by muqmc."""


class DimensionError(MuqmcError, ValueError):
    pass


class DomainError(MuqmcError, ValueError):
    pass


class EmptyInputError(MuqmcError, ValueError):
    pass


class AlignmentError(MuqmcError, ValueError):
    pass


class ParityError(MuqmcError, ValueError):
    pass


class UnsupportedError(MuqmcError, NotImplementedError):
    pass


class BudgetError(MuqmcError, RuntimeError):
    """A requested computation exceeds the configured size budget."""


class IncompleteTraceError(MuqmcError, ValueError):
    pass


class InvariantViolation(MuqmcError, AssertionError):
    """A proven inequality failed on measured data. Always a bug."""


class ParseError(MuqmcError, ValueError):
    """Malformed input file. Carries optional line/column context."""

    def __init__(self, message, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = []
        if source is not None:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
