"""Exception hierarchy shared by all nestmip modules."""


class NestError(Exception):
    """Base class for every error raised by nestmip."""


class InvalidGeometry(NestError):
    pass


class DegenerateGeometry(InvalidGeometry):
    pass


class InvalidWindow(NestError):
    pass


class FormatError(NestError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class InvalidInstance(NestError):
    pass


class InfeasibleInstance(NestError):
    pass


class BackendError(NestError):
    def __init__(self, message, output=""):
        self.output = output
        super().__init__(message)


class ParseError(NestError):
    pass


class CapExceeded(NestError):
    pass


class InputError(NestError):
    pass
