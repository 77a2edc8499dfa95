"""Exception hierarchy. The CLI maps these onto exit codes."""


class OnomastatError(Exception):
    exit_code = 1


class InputError(OnomastatError):
    """Bad input data: malformed rows, unknown tokens, missing names."""

    exit_code = 2


class ParseError(InputError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class SchemaError(ParseError):
    pass


class MissingNameError(InputError, KeyError):
    def __init__(self, name_key, where="reference"):
        self.name_key = name_key
        super().__init__(f"name {name_key!r} not present in {where}")

    def __str__(self):
        return self.args[0]


class DataInconsistencyError(InputError):
    pass


class DomainError(OnomastatError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 2


class ShapeError(OnomastatError, ValueError):
    exit_code = 2


class InfeasibleBinningError(OnomastatError):
    exit_code = 3


class UndefinedFractionError(DomainError):
    pass
