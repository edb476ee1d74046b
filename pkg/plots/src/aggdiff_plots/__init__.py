"""Figures from the solver's diagnostics.csv / rates.csv / summary.json files."""

from .figures import FIGURE_KINDS, FigureSpec, render
from .schema import (
    SchemaError,
    find_summary,
    read_diagnostics,
    read_rates,
    read_summary,
    summary_exponent,
)

__version__ = "0.1.0"

__all__ = [
    "FIGURE_KINDS",
    "FigureSpec",
    "render",
    "SchemaError",
    "find_summary",
    "read_diagnostics",
    "read_rates",
    "read_summary",
    "summary_exponent",
]
