"""Sparse canonical correlation analysis toolkit.

Linear and kernel CCA solved exactly through matrix factorizations or
through an equivalent least-squares formulation, with sparsity obtained
by l1-penalizing the least-squares problems and solving them with a
fixed-point continuation method.  Includes Tikhonov-regularized kernel
CCA, evaluation metrics (AROC retrieval, nearest-neighbour accuracy,
correlation sums, sparsity), cross-validation, and a command-line
driver.
"""

from . import cca, datagen, evaluation, fpc, io, kcca, kernels, matops
from .errors import (
    CancorrError,
    DegenerateData,
    FormatError,
    InvalidInput,
    InvalidState,
    NotPositiveSemidefinite,
    NumericalFailure,
)

__all__ = [
    "cca",
    "datagen",
    "evaluation",
    "fpc",
    "io",
    "kcca",
    "kernels",
    "matops",
    "CancorrError",
    "DegenerateData",
    "FormatError",
    "InvalidInput",
    "InvalidState",
    "NotPositiveSemidefinite",
    "NumericalFailure",
]

__version__ = "0.1.0"
