"""Exception hierarchy.

Everything raised on purpose by the package derives from
:class:`FWClassicalError`.  The CLI maps :class:`ConfigError` to exit code 2
and every other subclass to exit code 3.
"""


class FWClassicalError(Exception):
    """Base class for all package errors."""


class ConfigError(FWClassicalError, ValueError):
    """Invalid construction parameters or configuration document."""


class DomainError(FWClassicalError, ValueError):
    """Evaluation outside the region where a quantity is defined."""


class ModelError(FWClassicalError, ValueError):
    """The Hamiltonian radicand is negative at the requested phase point."""


class UnsupportedModelError(FWClassicalError, ValueError):
    """The requested operation does not support this Hamiltonian."""


class SolverError(FWClassicalError, RuntimeError):
    """A root finder or quadrature could not produce a trustworthy answer."""


class StructureError(FWClassicalError, RuntimeError):
    """The potential lacks the structure (e.g. a bound well) an operation needs."""


class StateError(FWClassicalError, ValueError):
    """A quantum state violates its normalization contract."""


class NumericalBlowupError(FWClassicalError, FloatingPointError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class IntegrationError(FWClassicalError, RuntimeError):
    """The adaptive ODE integrator failed."""

    def __init__(self, message, t=None, y=None):
        super().__init__(message)
        self.t = t
        self.y = y
