"""Almost periodic functions: continued fractions, almost periods, Kronecker
systems, Diophantine and box dimensions, monotone evolution and time averages."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ApdimError,
    BudgetExceeded,
    CertificationError,
    ValidationError,
)

__all__ = ["__version__", "ApdimError", "BudgetExceeded", "CertificationError", "ValidationError"]
