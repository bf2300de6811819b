"""Tropical cyclone eye location with a Mamdani fuzzy rule base and IR image refinement."""
from . import _kernels
from .geo import GeoPoint
from .storm import CrispInputs, EyeVerdict, build_storm_fis, judge

__version__ = "0.1.0"
BACKEND = _kernels.BACKEND

__all__ = ["BACKEND", "CrispInputs", "EyeVerdict", "GeoPoint", "build_storm_fis", "judge", "__version__"]
