"""Exception types shared across the package.

Each class maps onto one CLI exit status (see :mod:`csrp.cli`).
"""

from __future__ import annotations


class CsrpError(Exception):
    """Base class for all package errors."""


class ConfigurationError(CsrpError, ValueError):
    """Input data is malformed, inconsistent, or fails validation."""


class ContractViolation(CsrpError, ValueError):
    """A precondition of an operation was not met by the caller."""


class CapacityError(CsrpError, ValueError):
    """A documented size limit (degree, dimension, sample count) was exceeded."""


class NumericalFailure(CsrpError, RuntimeError):
    """A numerical assertion suite or solver failed."""


class ConfigParseError(ConfigurationError):
    """The configuration document cannot be read or has the wrong structure."""
