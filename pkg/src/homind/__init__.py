"""Homomorphism indistinguishability over bounded-depth graph classes."""

from .errors import CapabilityError, HomindError, ParseError, ValidationError
from .graph import Graph

__version__ = "0.1.0"

__all__ = ["CapabilityError", "Graph", "HomindError", "ParseError", "ValidationError", "__version__"]
