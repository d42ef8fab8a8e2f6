"""Exception hierarchy shared by every subpackage."""


class DferClipError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(DferClipError, ValueError):
    pass


class ConfigError(DferClipError, ValueError):
    pass


class DataError(DferClipError, ValueError):
    pass


class UsageError(DferClipError, RuntimeError):
    pass


class NumericError(DferClipError, ArithmeticError):
    pass


class OracleError(DferClipError, RuntimeError):
    pass


class IntegrityError(ConfigError):
    """A model parameter is missing from the optimizer partition."""


class AssemblyError(ConfigError):
    pass


class ProtocolError(DataError):
    pass


class TrainingError(DferClipError, RuntimeError):
    def __init__(self, message: str, batch_id: int | None = None):
        super().__init__(message)
        self.batch_id = batch_id
