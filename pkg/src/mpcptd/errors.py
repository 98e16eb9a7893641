"""Exception hierarchy shared by every module."""


class MPCPError(Exception):
    """Base class for all errors raised by mpcptd."""


class DomainError(MPCPError, ValueError):
    """An argument lies outside the domain of an operation."""


class MalformedFunctionError(MPCPError, ValueError):
    """A travel-time function is structurally broken (empty, unordered...)."""


class InfeasibleParametersError(DomainError):
    """p or K are incompatible with the instance (p > |F|, K > M, ...)."""


class BudgetExceededError(MPCPError, RuntimeError):
    """An exhaustive oracle refuses to run because the enumeration is too large."""


class IGPDerivationError(MPCPError, ValueError):
    """A travel-time function cannot be expressed with a dummy length and speed."""


class InstanceError(MPCPError, ValueError):
    """Base class for instance loading and validation problems."""


class InstanceFormatError(InstanceError):
    """The file is not parseable JSON."""


class SchemaError(InstanceError):
    """The JSON document does not follow the instance schema."""


class ValidationError(InstanceError):
    """The instance is well formed but violates a network invariant."""


class AlignmentError(ValidationError):
    """A breakpoint does not coincide with a grid instant."""


class CompletenessError(ValidationError):
    """An arc of F x C is missing or duplicated."""


class FIFOError(ValidationError):
    """A travel-time function violates the FIFO property."""
