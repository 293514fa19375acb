"""Numerical verification toolkit for Type IIA geometry and the Type IIA flow."""

from .errors import IIAError
from .geometry import Geometry, JetChartBackend, LieAlgebra, LieAlgebraBackend
from .typeiia import TypeIIAStructure, build_structure

__version__ = "0.1.0"

__all__ = [
    "Geometry",
    "IIAError",
    "JetChartBackend",
    "LieAlgebra",
    "LieAlgebraBackend",
    "TypeIIAStructure",
    "build_structure",
]
