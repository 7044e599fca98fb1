"""Exception types raised across the package."""


class DegradeIQAError(Exception):
    """Base class for all package errors."""


class InvalidArgument(DegradeIQAError, ValueError):
    pass


class InvalidConfiguration(DegradeIQAError, ValueError):
    pass


class UnsupportedDistortion(DegradeIQAError):
    """A distortion kind cannot run in this environment (missing codec adapter)."""

    def __init__(self, kind: str, reason: str = "no codec adapter registered"):
        self.kind = kind
        super().__init__(f"unsupported distortion {kind!r}: {reason}")


class IllConditioned(DegradeIQAError, ArithmeticError):
    pass


class UndefinedCorrelation(DegradeIQAError, ArithmeticError):
    pass
