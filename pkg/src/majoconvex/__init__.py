"""Majorization, matrix orders and rank-one convexity checks for isotropic potentials."""

__version__ = "0.1.0"

from ._validation import DomainError, PreconditionError
from .sampling import SamplingPlan, Verdict

__all__ = ["__version__", "DomainError", "PreconditionError", "SamplingPlan", "Verdict"]
