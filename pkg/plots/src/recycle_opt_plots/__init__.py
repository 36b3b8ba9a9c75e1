"""Figures from recycle-opt result CSVs: error-vs-c, runtime-vs-c, trajectories."""

from .figures import FigureSpec, build_figure, render

__version__ = "0.1.0"
