class IntlinError(Exception):
    """Base class for all errors raised by this package."""


class MalformedEvent(IntlinError):
    pass


class NotWellFormed(IntlinError):
    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        # 1-based event number within the execution / document
        self.position = position


class NoPendingMatch(IntlinError):
    pass


class IllegalInput(IntlinError):
    pass


class BudgetExceeded(IntlinError):
    pass


class UnknownObject(IntlinError):
    pass


class BadParams(IntlinError):
    pass


class UnknownVertex(IntlinError):
    pass


class InvalidTask(IntlinError):
    pass


class NotOneShot(IntlinError):
    pass


class NotTotal(IntlinError):
    pass


class NotLinearizable(IntlinError):
    pass


class NoResponseFound(IntlinError):
    pass


class IllegalProcess(IntlinError):
    pass


class UnknownDemo(IntlinError):
    pass
