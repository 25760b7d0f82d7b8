"""Exact computations with regular homotopy classes of loops on a disk with holes."""

from .algebra import AlgebraError, CyclicSeries, TruncSeries, cyclic_canonical, parse_series, parse_word
from .surface import FramedClass, Framing, LoopSum, SurfaceModel, parse_loop

__all__ = [
    "AlgebraError",
    "CyclicSeries",
    "FramedClass",
    "Framing",
    "LoopSum",
    "SurfaceModel",
    "TruncSeries",
    "cyclic_canonical",
    "parse_loop",
    "parse_series",
    "parse_word",
]
__version__ = "0.1.0"
