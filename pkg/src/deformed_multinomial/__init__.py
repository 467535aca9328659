"""Deformed multinomial coefficients, expansions and distributions."""

from .algebra import PRESETS, DeformationAlgebra, invert_parameters, make_custom_algebra, make_preset_algebra
from .combinatorics import MultiIndex, multinomial
from .distributions import KINDS, DistributionSpec, PmfTable, make_spec, pmf, pmf_table, sample
from .exceptions import ConvergenceError, DeformationError, NumericalError, ParameterError, TruncationWarning
from .verification import run_suite

__version__ = "0.1.0"

__all__ = [
    "KINDS",
    "PRESETS",
    "ConvergenceError",
    "DeformationAlgebra",
    "DeformationError",
    "DistributionSpec",
    "MultiIndex",
    "NumericalError",
    "ParameterError",
    "PmfTable",
    "TruncationWarning",
    "invert_parameters",
    "make_custom_algebra",
    "make_preset_algebra",
    "make_spec",
    "multinomial",
    "pmf",
    "pmf_table",
    "run_suite",
    "sample",
]
