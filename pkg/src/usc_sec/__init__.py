"""Loss rates, master equations and reflection spectra of ultrastrongly
coupled resonator/qubit circuits, with the system-environment coupling
written in the eigenbasis of the coupled system."""
from .bogoliubov import BogoliubovModes, hopfield_diagonalize
from .errors import (
    ConvergenceWarning,
    DephasingWarning,
    DomainError,
    GoodCavityWarning,
    IndependentTransitionWarning,
    InstabilityError,
    IntegrationError,
    InvalidRateError,
    NonUniqueSteadyStateError,
    USCError,
    VariantError,
)
from .fock import EigenSystem, FockOperator, eig_hermitian, two_mode_ops
from .models import ModelParams, Variant, build_hamiltonian
from .sec_rates import CouplingKind, SecFlavor, TransitionRates, eigensystem_rates, make_flavor

__version__ = "0.1.0"
