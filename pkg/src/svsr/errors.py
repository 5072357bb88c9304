"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Invalid truncation dimension, mode index or shape mismatch."""


class ContractError(ValueError):
    """Input violates a documented precondition (e.g. non-Hermitian matrix)."""


class NotPSDError(ContractError):
    pass


class InvalidStateError(ContractError):
    pass


class TruncationError(ValueError):
    """Fock truncation too small for the requested state or dynamics."""


class IntegrationError(RuntimeError):
    """Numerical integration left the physical state space (trace drift, dt too large)."""


class ConfigError(ValueError):
    pass
