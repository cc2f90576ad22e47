"""Fractional and geometric fractional colourings of Moser-lattice unit-distance graphs."""

from .field import MoserPoint, is_unit_distance, sq_dist
from .udgraph import UnitGraph, build_graph, read_graph

__all__ = ["MoserPoint", "UnitGraph", "build_graph", "is_unit_distance", "read_graph", "sq_dist"]
__version__ = "0.1.0"
