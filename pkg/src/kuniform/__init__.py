"""Exact construction and verification of k-uniform mixed states.

Qubit states come from GF(4) generator matrices; qudit states come from
orthogonal arrays partitioned into blocks of large minimal distance.  Every
claim is checked twice: combinatorially in ``oa_core`` and quantum
mechanically in ``quantum_verify``.
"""

from .algebra import GaussianRational, PauliWord
from .constructions import DifferenceScheme, LinearCodeSpec
from .oa_core import OrthogonalArray, OrthogonalPartition
from .quantum_verify import MixedState, ReducedDensity, SparseState
from .stabilizer import DenseOperator, GeneratorMatrix

__all__ = [
    "DenseOperator",
    "DifferenceScheme",
    "GaussianRational",
    "GeneratorMatrix",
    "LinearCodeSpec",
    "MixedState",
    "OrthogonalArray",
    "OrthogonalPartition",
    "PauliWord",
    "ReducedDensity",
    "SparseState",
]

__version__ = "0.1.0"
