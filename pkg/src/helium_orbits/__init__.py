"""Collinear periodic orbits of the mean-interaction helium atom.

Free-fall arcs are matched through a common mean field, reflected into
period-one collision orbits, lifted by the Levi-Civita transformation and
checked as critical points of the regularized action.
"""

from .document import OrbitDocument, build_document
from .errors import AccuracyError, DegenerateError, DomainError, RegularityError
from .matching import OrbitPair, build_orbit, kappa, psi
from .quadrature import DEFAULT, Quadrature
from .specfun import ShapeParam, f, g, h, phi, solve_phi

__all__ = [
    "AccuracyError", "DEFAULT", "DegenerateError", "DomainError", "OrbitDocument",
    "OrbitPair", "Quadrature", "RegularityError", "ShapeParam", "build_document",
    "build_orbit", "f", "g", "h", "kappa", "phi", "psi", "solve_phi",
]

__version__ = "0.1.0"
