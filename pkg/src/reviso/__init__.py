"""Numerics for the stability of the reverse isoperimetric inequality in low dimensions."""

from .errors import RevisoError
from .geometry import Polytope, from_halfspaces, from_points, regular_simplex, simplex_contacts
from .john import JohnDecomposition, john_decomposition, john_normalize, max_inscribed_ellipsoid
from .measures import SphericalMeasure, random_isotropic, standard_simplex_measure
from .zbody import z_body

__all__ = [
    "RevisoError",
    "Polytope",
    "from_halfspaces",
    "from_points",
    "regular_simplex",
    "simplex_contacts",
    "JohnDecomposition",
    "john_decomposition",
    "john_normalize",
    "max_inscribed_ellipsoid",
    "SphericalMeasure",
    "random_isotropic",
    "standard_simplex_measure",
    "z_body",
]

__version__ = "0.1.0"
