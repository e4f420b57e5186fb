"""Exception types shared across the package."""


class TimesparseError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(TimesparseError, ValueError):
    """Operands have incompatible or empty dimensions."""


class DomainError(TimesparseError, ValueError):
    """Numeric input outside an operation's domain."""


class ContractError(TimesparseError, ValueError):
    """A caller violated an operation's precondition."""


class EmptyInputError(ContractError):
    """A sequence operation received zero frames."""


class ParseError(TimesparseError, ValueError):
    """Malformed text input; the message names the offending line."""


class SchemaError(TimesparseError, ValueError):
    """Well-formed input that violates the dataset schema."""


class CheckpointError(TimesparseError, ValueError):
    """Unreadable or incompatible checkpoint file."""


class TrainingDiverged(TimesparseError, RuntimeError):
    """Training aborted because the loss became non-finite."""
