"""Rauzy fractals of Pisot substitutions, symbol splittings, conjugation by
elementary free group automorphisms, and fractals with a prescribed number
of holes."""

from .substitution import Occurrence, Substitution
from .words import FreeGroupMorphism

__all__ = ["FreeGroupMorphism", "Occurrence", "Substitution"]
__version__ = "0.1.0"
