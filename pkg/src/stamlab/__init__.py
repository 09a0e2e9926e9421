"""Entropy-power set functions: checks, Gaussian and 1-D density witnesses."""

__version__ = "0.1.0"

from .fracpart import FractionalPartition, check_fsa, enumerate_extreme_partitions, fsa_lp_max
from .gauss import GaussianEnsemble, nu_G
from .setfn import PropertyReport, SetFunction, check_supermodular, check_supermodular_local

__all__ = [
    "FractionalPartition",
    "GaussianEnsemble",
    "PropertyReport",
    "SetFunction",
    "check_fsa",
    "check_supermodular",
    "check_supermodular_local",
    "enumerate_extreme_partitions",
    "fsa_lp_max",
    "nu_G",
    "__version__",
]
