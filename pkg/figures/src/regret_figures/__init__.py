"""Figure rendering for heavy-tailed bandit regret traces."""

from .plotting import CurveData, PlotSpec, SchemaError, build_figure, load_traces, render

__all__ = [
    "CurveData",
    "PlotSpec",
    "SchemaError",
    "build_figure",
    "load_traces",
    "render",
]
