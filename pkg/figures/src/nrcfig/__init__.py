"""Figure rendering for non-reciprocity simulation CSV results."""

from .render import build_figure, read_series, render
from .specs import CSV_COLUMNS, PRESET_NAMES, FigureSpec, make_spec

__all__ = ["CSV_COLUMNS", "FigureSpec", "PRESET_NAMES", "build_figure",
           "make_spec", "read_series", "render"]
