"""Matrix regularization of S^2, S^3, S^4 and S^2 x S^2."""

from .brackets import StructureConstants, classical_structure_constants, coordinate_table
from .convergence import ConvergenceReport, counting_checks, independence_check, remainder_scaling, run_convergence
from .gamma import GammaFamily, make_gamma_family
from .harmonics import HarmonicBasis, HarmonicMode, harmonic_basis
from .linalg import SpinRep, k_commutator, make_spin_rep
from .matrixify import (
    CapacityError,
    MatrixHarmonicSet,
    build_matrix_set,
    leibniz_remainder,
    matrix_structure_constants,
    quantum_bracket,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ConvergenceReport",
    "GammaFamily",
    "HarmonicBasis",
    "HarmonicMode",
    "MatrixHarmonicSet",
    "SpinRep",
    "StructureConstants",
    "build_matrix_set",
    "classical_structure_constants",
    "coordinate_table",
    "counting_checks",
    "harmonic_basis",
    "independence_check",
    "k_commutator",
    "leibniz_remainder",
    "make_gamma_family",
    "make_spin_rep",
    "matrix_structure_constants",
    "quantum_bracket",
    "remainder_scaling",
    "run_convergence",
]
