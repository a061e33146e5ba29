"""uulandau: deterministic quantum-Boltzmann (Uehling-Uhlenbeck) and
Fokker-Planck-Landau solver with a verification harness for the
semi-classical limit."""

__version__ = "0.1.0"

from .errors import (AccuracyError, BlowUpError, DataError, DegenerateFitError,
                     DomainError, GridMismatchError, PreconditionError)
from .potential import Potential
