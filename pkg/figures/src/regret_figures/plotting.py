"""Comparison figures from regret CSVs.

Input is the simulator's trace file (columns algo,noise,rep,pull,cum_regret).
The figure gets one panel per noise model and one curve per algorithm:
the pointwise mean over repetitions, optionally shaded with the standard
error band. Colors and markers are assigned by sorted algorithm name so
legends stay stable across files.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from matplotlib.figure import Figure

REQUIRED_COLUMNS = ("algo", "noise", "rep", "pull", "cum_regret")

MAX_POINTS_PER_CURVE = 1000

_COLOR_CYCLE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
_MARKER_CYCLE = ("o", "s", "^", "v", "D", "x", "*", "P")


class SchemaError(ValueError):
    """The CSV does not carry the expected trace columns or any data."""


@dataclass(frozen=True)
class PlotSpec:
    input_csv: str
    output: str
    panels: tuple[str, ...] = ()  # empty: every noise found in the CSV
    curves: tuple[str, ...] = ()  # empty: every algorithm found
    band: bool = True
    dpi: int = 120
    panel_size: tuple[float, float] = (5.5, 4.0)


@dataclass
class CurveData:
    pulls: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_reps: int = 0


def load_traces(path: str) -> dict[str, dict[str, CurveData]]:
    """Parse the CSV into {noise: {algo: CurveData}} with rep averaging."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        names = tuple(reader.fieldnames or ())
        missing = [c for c in REQUIRED_COLUMNS if c not in names]
        if missing:
            raise SchemaError(
                f"{path}: missing required columns {missing}; "
                f"expected header {','.join(REQUIRED_COLUMNS)}"
            )
        series: dict[tuple[str, str, int], list[tuple[int, float]]] = {}
        order: list[tuple[str, str]] = []
        for row in reader:
            key = (row["noise"], row["algo"], int(row["rep"]))
            if key[:2] not in order:
                order.append(key[:2])
            series.setdefault(key, []).append(
                (int(row["pull"]), float(row["cum_regret"]))
            )
    if not series:
        raise SchemaError(f"{path}: no trace rows")

    out: dict[str, dict[str, CurveData]] = {}
    for noise, algo in order:
        reps = sorted(k[2] for k in series if k[:2] == (noise, algo))
        grids = []
        values = []
        for rep in reps:
            points = sorted(series[(noise, algo, rep)])
            grids.append(tuple(p for p, _ in points))
            values.append(np.array([v for _, v in points]))
        if len(set(grids)) != 1:
            raise SchemaError(
                f"{path}: repetitions of ({algo}, {noise}) have misaligned pull grids"
            )
        stack = np.vstack(values)
        n = stack.shape[0]
        stderr = (
            np.zeros(stack.shape[1])
            if n == 1
            else stack.std(axis=0, ddof=1) / math.sqrt(n)
        )
        out.setdefault(noise, {})[algo] = CurveData(
            pulls=np.array(grids[0]), mean=stack.mean(axis=0), stderr=stderr, n_reps=n
        )
    return out


def _downsample(curve: CurveData) -> CurveData:
    n = len(curve.pulls)
    if n <= MAX_POINTS_PER_CURVE:
        return curve
    idx = np.unique(
        np.concatenate([np.linspace(0, n - 1, MAX_POINTS_PER_CURVE).astype(int), [n - 1]])
    )
    return CurveData(curve.pulls[idx], curve.mean[idx], curve.stderr[idx], curve.n_reps)


def build_figure(data: dict[str, dict[str, CurveData]], spec: PlotSpec) -> Figure:
    """Assemble the panel figure; pure function of the parsed data."""
    panels = spec.panels or tuple(data.keys())
    unknown = [p for p in panels if p not in data]
    if unknown:
        raise SchemaError(f"requested panels not in CSV: {unknown}")
    all_curves = sorted({a for p in panels for a in data[p]})
    if spec.curves:
        all_curves = [a for a in all_curves if a in spec.curves]
        if not all_curves:
            raise SchemaError("no requested curves present in the CSV")
    style = {
        algo: (_COLOR_CYCLE[i % len(_COLOR_CYCLE)], _MARKER_CYCLE[i % len(_MARKER_CYCLE)])
        for i, algo in enumerate(all_curves)
    }

    w, h = spec.panel_size
    fig = Figure(figsize=(w * len(panels), h))
    axes = fig.subplots(1, len(panels), squeeze=False)[0]
    for ax, noise in zip(axes, panels):
        for algo in all_curves:
            if algo not in data[noise]:
                continue
            curve = _downsample(data[noise][algo])
            color, marker = style[algo]
            ax.plot(
                curve.pulls,
                curve.mean,
                label=algo,
                color=color,
                marker=marker,
                markevery=max(1, len(curve.pulls) // 12),
                markersize=4,
                linewidth=1.4,
            )
            if spec.band and curve.n_reps > 1:
                ax.fill_between(
                    curve.pulls,
                    curve.mean - curve.stderr,
                    curve.mean + curve.stderr,
                    color=color,
                    alpha=0.2,
                    linewidth=0,
                )
        ax.set_title(noise.replace("_", " "))
        ax.set_xlabel("pulls")
        ax.set_ylabel("cumulative regret")
        ax.legend(loc="upper left", fontsize=9)
    fig.tight_layout()
    return fig


def render(spec: PlotSpec) -> None:
    """Load, build, and write the figure to spec.output."""
    data = load_traces(spec.input_csv)
    fig = build_figure(data, spec)
    # strip the renderer version stamp so identical inputs give identical bytes
    metadata = {"Software": None} if spec.output.endswith(".png") else None
    fig.savefig(spec.output, dpi=spec.dpi, metadata=metadata)
