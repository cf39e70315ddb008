"""Stiffness, equilibria and buckling of serial chains of dual-triangle tensegrity segments."""

__version__ = "0.1.0"

from .buckling import BucklingSolution, post_buckling_prediction, solve_buckling
from .chain import ChainModel, Deflection, EndLoad
from .equilibria import Equilibrium, Stability, find_equilibria, force_deflection_sweep
from .segment import SegmentGeometry, SpringControl

__all__ = [
    "BucklingSolution",
    "ChainModel",
    "Deflection",
    "EndLoad",
    "Equilibrium",
    "SegmentGeometry",
    "SpringControl",
    "Stability",
    "find_equilibria",
    "force_deflection_sweep",
    "post_buckling_prediction",
    "solve_buckling",
]
