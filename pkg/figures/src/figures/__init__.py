"""Publication-style figures rendered from persisted experiment artifacts.

Pure presentation: estimates are read from the experiment CLI's CSV/JSON
files and plotted with error bars and reference lines; nothing is recomputed.
"""

from .render import FigureSpec, SchemaError, render

__all__ = ["FigureSpec", "SchemaError", "render"]

__version__ = "1.0.0"
