"""Numerical laboratory for the cubic random-matrix model at its Painleve I critical point."""

from .numkernel import PrecisionContext

__version__ = "0.1.0"
__all__ = ["PrecisionContext", "__version__"]
