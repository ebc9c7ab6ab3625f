"""Exception hierarchy shared by every module.

Each exception knows the CLI exit code it maps to: 1 for property
violations discovered while checking, 2 for malformed input of any kind.
"""


class BallspaceError(Exception):
    exit_code = 2


class MalformedInputError(BallspaceError, ValueError):
    pass


class ParseError(MalformedInputError):
    def __init__(self, message, line=None, column=None, path=None):
        self.line = line
        self.column = column
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
            if column is not None:
                where += f"{column}:"
        super().__init__(f"{where} {message}" if where else message)


class InvariantError(MalformedInputError):
    """A loaded object violates an invariant of its type."""


class DomainError(BallspaceError, ValueError):
    pass


class PreconditionError(BallspaceError):
    exit_code = 1


class ResourceLimitError(BallspaceError, RuntimeError):
    pass
