"""Figure scripts over boolspace output files; no producer imports."""

from .recipes import FigureRecipe
from .schema import SchemaError

__all__ = ["FigureRecipe", "SchemaError"]
__version__ = "0.1.0"
