"""Topological analysis of a dissipative SSH chain.

Modules
-------
model
    Parameters, Hamiltonians and open-chain spectra.
thirdq
    Third-quantized shape matrices (element and block constructions).
polyalg
    Laurent/bivariate polynomials, resultants and root finding.
gbz
    Characteristic equations, numerical GBZ clouds and auxiliary GBZ loops.
invariants
    Winding numbers, Zak phases and symmetry classification.
liouville
    Lindbladian exact diagonalization on a truncated Fock space.
cli
    The ``nhtopo`` command-line front end.
"""

from .errors import (
    BandCrossingError,
    ConfigError,
    ConvergenceError,
    FactorizationError,
    GapClosingError,
    NhtopoError,
    NumericalError,
    TruncationOverflowError,
)
from .model import Boundary, ModelParams, obc_spectrum
from .thirdq import bloch_shape_matrix, shape_matrix_blocks, shape_matrix_elements
from .gbz import agbz_curves, assign_subgbz, characteristic_eq, numerical_gbz
from .invariants import classify_az, compute_invariants, winding_zero_pole, zak_phase
from .liouville import build_superoperator, spectrum_compare

__version__ = "0.1.0"

__all__ = [
    "BandCrossingError",
    "ConfigError",
    "ConvergenceError",
    "FactorizationError",
    "GapClosingError",
    "NhtopoError",
    "NumericalError",
    "TruncationOverflowError",
    "Boundary",
    "ModelParams",
    "obc_spectrum",
    "bloch_shape_matrix",
    "shape_matrix_blocks",
    "shape_matrix_elements",
    "agbz_curves",
    "assign_subgbz",
    "characteristic_eq",
    "numerical_gbz",
    "classify_az",
    "compute_invariants",
    "winding_zero_pole",
    "zak_phase",
    "build_superoperator",
    "spectrum_compare",
]
