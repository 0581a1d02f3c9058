"""Figure generation from esqd harness outputs."""
from .figures import KINDS, FigureRequest, convergence_table, heatmap_grid, render
from .io import InputError

__all__ = [
    "KINDS",
    "FigureRequest",
    "InputError",
    "convergence_table",
    "heatmap_grid",
    "render",
]
