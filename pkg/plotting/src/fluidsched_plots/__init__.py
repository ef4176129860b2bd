"""Figure rendering for fluid-scheduling experiment CSVs."""

from .figures import EmptyGroup, FigureSpec, SchemaError, render

__version__ = "0.1.0"

__all__ = ["EmptyGroup", "FigureSpec", "SchemaError", "render"]
