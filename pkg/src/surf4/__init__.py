"""Curvature, Gauss-map and congruence analysis for surfaces in R^4.

Surfaces are given in Monge form (x, y) -> (x, y, phi(x, y), psi(x, y)).
The package computes Gaussian/normal curvature and point classification,
maps tangent planes to the Grassmannian of 2-planes in R^4 (Pluecker and
sphere-pair coordinates), tests isoclinic and Lagrangean properties,
constructs the rigid motion taking a surface with circle-bound Gauss image
to a Lagrangean surface, and rebuilds the isoclinic-but-not-Lagrangean
counterexample surface by integrating its characteristic system.
"""

from .expr import SurfaceDef, parse_surface, eval_surface
from .jets import Jet

__all__ = ["Jet", "SurfaceDef", "parse_surface", "eval_surface"]
__version__ = "0.1.0"
