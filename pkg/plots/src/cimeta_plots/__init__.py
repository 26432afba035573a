"""Figure regeneration from cimeta CSV outputs.

Reads the documented sweep-grid and pair-matrix CSV schemas and renders
deterministic heatmaps and region diagrams. No measure computation
happens here.
"""

__version__ = "0.1.0"

from .io import GridData, PairData, SchemaError, margin_stamp, read_grid_csv, read_pair_csv
from .render import render_grid_heatmap, render_pair_matrix, render_region_diagram

__all__ = [
    "GridData",
    "PairData",
    "SchemaError",
    "margin_stamp",
    "read_grid_csv",
    "read_pair_csv",
    "render_grid_heatmap",
    "render_pair_matrix",
    "render_region_diagram",
]
