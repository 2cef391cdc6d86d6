class ParameterRangeError(ValueError):
    """A numeric parameter lies outside the legal range of an operation."""


class ContractError(ValueError):
    """An argument violates an operation's documented contract."""


class PreconditionError(ContractError):
    """Input data fails a mathematical precondition (e.g. a slope condition)."""


class ResourceError(RuntimeError):
    """An exhaustive routine was asked for an instance beyond its size bound."""
