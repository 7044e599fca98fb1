"""Deterministic synthetic image degradation and NR-IQA evaluation toolkit."""

from .errors import (
    DegradeIQAError,
    IllConditioned,
    InvalidArgument,
    InvalidConfiguration,
    UndefinedCorrelation,
    UnsupportedDistortion,
)

__version__ = "0.1.0"

__all__ = [
    "DegradeIQAError",
    "IllConditioned",
    "InvalidArgument",
    "InvalidConfiguration",
    "UndefinedCorrelation",
    "UnsupportedDistortion",
    "__version__",
]
