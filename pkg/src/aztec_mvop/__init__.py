"""Numerics for periodic Aztec-diamond weight matrices: matrix orthogonal
polynomials, Wiener-Hopf factors, correlation kernels, and the explicit
theta-function solution of the two-by-two periodic model."""

from .contour import CircleContour, ContourPair, pole_enclosing_contour
from .matpoly import MatrixPolynomial
from .mvop import MomentTable, MVOPSolution, compute_moments, solve_all
from .weights import WeightData, load_weight_config

__all__ = [
    "CircleContour",
    "ContourPair",
    "MatrixPolynomial",
    "MomentTable",
    "MVOPSolution",
    "WeightData",
    "compute_moments",
    "load_weight_config",
    "pole_enclosing_contour",
    "solve_all",
]

__version__ = "0.1.0"
