"""Topological analysis of the Rössler system near its trefoil parameters."""
from __future__ import annotations

__version__ = "0.1.0"

from .flow import Params, fixed_points, vector_field

__all__ = ["Params", "fixed_points", "vector_field", "__version__"]
