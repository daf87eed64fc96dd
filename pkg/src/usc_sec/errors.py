"""Exception and warning types shared across the package."""


class USCError(Exception):
    """Base class for all errors raised by usc_sec."""


class InvalidDimensionError(USCError, ValueError):
    pass


class HermiticityError(USCError, ValueError):
    pass


class ShapeError(USCError, ValueError):
    pass


class InstabilityError(USCError, ArithmeticError):
    """A quadratic model has complex normal-mode frequencies."""


class NegativeNormError(USCError, ArithmeticError):
    """A positive-frequency Bogoliubov branch came out with non-positive norm."""


class OrderingError(USCError, ValueError):
    pass


class VariantError(USCError, ValueError):
    pass


class DomainError(USCError, ValueError):
    pass


class InvalidRateError(USCError, ValueError):
    pass


class NumericError(USCError, ArithmeticError):
    pass


class IntegrationError(NumericError):
    pass


class NonUniqueSteadyStateError(NumericError):
    def __init__(self, message, basis=None):
        super().__init__(message)
        self.basis = basis


class ConvergenceWarning(UserWarning):
    """Result changed by more than the tolerance when the Fock truncation was doubled."""


class DephasingWarning(UserWarning):
    """Coupling operator has diagonal elements in the eigenbasis; they are dropped."""


class IndependentTransitionWarning(UserWarning):
    """Transitions closer than a few linewidths; post-trace RWA results unreliable."""


class GoodCavityWarning(UserWarning):
    """Bare loss rate is not small compared with the system frequencies."""
