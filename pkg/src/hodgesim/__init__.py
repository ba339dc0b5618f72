"""Exact verification toolkit for Hodge similarities, rational quadratic
forms and even Clifford algebras."""

from .exact import Matrix, QuadExt, rat, rat_str
from .quadspace import QuadSpace, diagonalize, isometric, rational_invariants, signature
from .report import VerificationReport
from .similarity import Similarity, eigenspace_decomposition, hodge_locus_dimension, similarity_verify

__all__ = [
    "Matrix", "QuadExt", "QuadSpace", "Similarity", "VerificationReport",
    "diagonalize", "eigenspace_decomposition", "hodge_locus_dimension", "isometric",
    "rat", "rat_str", "rational_invariants", "signature", "similarity_verify",
]
__version__ = "0.1.0"
