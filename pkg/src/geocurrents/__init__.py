"""Curve functionals on surface groups, their smoothing axioms and dual geodesic currents."""
from .config import Config, get_config, using
from .errors import GeoCurrentsError
from .sgroup import GroupElement, Presentation, get_presentation

__version__ = "0.1.0"

__all__ = ["Config", "get_config", "using", "GeoCurrentsError", "GroupElement", "Presentation",
           "get_presentation", "__version__"]
