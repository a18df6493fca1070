"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument is outside its documented domain."""


class CapacityError(RuntimeError):
    """An exact computation would exceed a configured size cap."""


class PreconditionError(RuntimeError):
    """A certified precondition of an experiment failed when re-checked."""
