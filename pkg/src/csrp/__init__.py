"""Numerical laboratory for reflection-positive Gaussian and Berezin functionals,
truncated Fock spaces, interaction operators, Trotter partition sequences and a
matrix Airy integral."""

__version__ = "0.1.0"

from .errors import CapacityError, ConfigParseError, ConfigurationError, ContractViolation, CsrpError, NumericalFailure
from .lie_algebra import LieAlgebraSpec, load_preset, validate_lie
from .splitting import SplittingSpec, canonical_preset, validate_splitting

__all__ = [
    "__version__",
    "CapacityError",
    "ConfigParseError",
    "ConfigurationError",
    "ContractViolation",
    "CsrpError",
    "NumericalFailure",
    "LieAlgebraSpec",
    "SplittingSpec",
    "canonical_preset",
    "load_preset",
    "validate_lie",
    "validate_splitting",
]
