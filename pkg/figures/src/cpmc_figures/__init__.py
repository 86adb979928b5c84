"""Publication figures from changepoint-mc sweep results.

This package reads the sweep CSV schema and the `cpmc constants` JSON
output; it does not import the simulation library itself, so the two
packages can be installed and upgraded independently.
"""

from .reference import Constants, fetch_constants, parse_constants
from .render import FIGURE_SPECS, FigureSpec, render_all, render_figure
from .sweep_data import SchemaError, SweepTable, load_sweep

__version__ = "0.1.0"

__all__ = [
    "Constants", "fetch_constants", "parse_constants",
    "FIGURE_SPECS", "FigureSpec", "render_all", "render_figure",
    "SchemaError", "SweepTable", "load_sweep",
    "__version__",
]
