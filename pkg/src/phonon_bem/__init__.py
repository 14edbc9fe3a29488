"""Boundary-integral solver for Bloch spectra of high-contrast two-phase elastic crystals."""
__version__ = "0.1.0"

from .kernels import LameParams
from .geometry import Circle, Ellipse, FourierStar, sample_mesh
from .charvalue import RootWindow

__all__ = ["LameParams", "Circle", "Ellipse", "FourierStar", "sample_mesh", "RootWindow", "__version__"]
