"""Exception types shared across the package."""


class CapacityError(ValueError):
    """Raised when a request exceeds a hard resource guard (qubits, enumeration size)."""


class OptimizationError(RuntimeError):
    """Raised when an optimizer run must abort, e.g. on a non-finite estimate."""
