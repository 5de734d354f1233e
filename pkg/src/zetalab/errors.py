"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so keep the classes distinct even where
they look redundant.
"""


class LabError(Exception):
    """Base class for all library errors."""


class DomainError(LabError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class BoundsError(LabError, ValueError):
    """A size or range limit of the implementation was exceeded."""


class InsufficientTableError(BoundsError):
    """The prime table does not reach far enough for the requested sum."""


class CapabilityError(LabError):
    """The request is valid but beyond what the evaluator can deliver."""


class ConfigError(LabError, ValueError):
    """Invalid configuration (schedule overrides, CLI parameters, ...)."""
