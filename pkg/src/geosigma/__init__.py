"""Homogenised surface tension of periodic Ginzburg-Landau media via geodesic distances."""
from .kernels import BACKEND
from .medium import CoefficientField, DirectionFrame, direction_frame, eval_a, make_field
from .sigma import SigmaEstimate, sigma_estimate

__version__ = "0.1.0"

__all__ = ["BACKEND", "CoefficientField", "DirectionFrame", "SigmaEstimate", "direction_frame",
           "eval_a", "make_field", "sigma_estimate", "__version__"]
