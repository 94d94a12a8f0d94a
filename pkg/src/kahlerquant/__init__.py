"""Exact formal deformation quantization at a point of a Kahler manifold."""
from .scalar import Scalar, rational
from .jet import JetPoly
from .weyl import INF, WeylForm, WickAlgebra, classical_exp, star_exp

__all__ = ["INF", "JetPoly", "Scalar", "WeylForm", "WickAlgebra", "classical_exp", "rational", "star_exp"]
__version__ = "0.1.0"
