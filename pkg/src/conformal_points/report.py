"""Run reports, delimited plot data, and rendered figures.

Reports serialize deterministically: stable key order, integers stay
integers, and the wall-clock measurement is kept in memory and on the
console only, so two runs with the same configuration and seed produce
byte-identical report files.

Plot emission writes one CSV grid per chart (header ``u,v,value``), a CSV
of located zeros with indices, and a rendered PNG heatmap per chart with
the zeros marked.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import __version__  # noqa: E402

__all__ = ["RunReport", "sample_section_grids", "emit_plot_data"]


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if value is None or isinstance(value, str):
        return value
    return str(value)


@dataclass
class RunReport:
    subcommand: str
    config: dict
    results: dict
    diagnostics: dict = field(default_factory=dict)
    version: str = __version__
    wall_clock: float = 0.0  # seconds; reported on the console, never serialized

    def to_dict(self):
        return {
            "subcommand": self.subcommand,
            "config": _jsonable(self.config),
            "results": _jsonable(self.results),
            "diagnostics": _jsonable(self.diagnostics),
            "version": self.version,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(subcommand=data["subcommand"], config=data["config"],
                   results=data["results"], diagnostics=data["diagnostics"],
                   version=data["version"])

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())


def sample_section_grids(section, n=256):
    """Per-chart (u, v, |section|) arrays with NaN outside the surface."""
    grids = {}
    for chart in section.surface.charts:
        grid = chart.scan_grid(n)
        mag = np.broadcast_to(
            np.abs(section.components(chart.id, grid.u, grid.v)),
            grid.u.shape).copy()
        mag[~grid.mask] = np.nan
        grids[chart.id] = (grid.u, grid.v, mag)
    return grids


def _write_grid_csv(path, u, v, value):
    flat = np.column_stack([u.reshape(-1), v.reshape(-1), value.reshape(-1)])
    np.savetxt(path, flat, delimiter=",", header="u,v,value", comments="",
               fmt="%.12g")


def _write_points_csv(path, points):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["chart", "u", "v", "index"])
        for p in points:
            writer.writerow([p.chart_id, f"{p.u:.12g}", f"{p.v:.12g}",
                             int(p.index)])


def _render_figure(path, chart_id, u, v, value, points, label):
    fig, ax = plt.subplots(figsize=(5.4, 4.5))
    with np.errstate(invalid="ignore"):
        shaded = np.log10(np.maximum(value, 1e-16))
    mesh = ax.pcolormesh(u, v, shaded, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=f"log10 {label}")
    marked = [p for p in points if p.chart_id == chart_id]
    if marked:
        ax.scatter([p.u for p in marked], [p.v for p in marked],
                   s=45, facecolors="none", edgecolors="red", linewidths=1.4)
        for p in marked:
            ax.annotate(f"{p.index:+d}", (p.u, p.v), textcoords="offset points",
                        xytext=(6, 5), color="red", fontsize=9)
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    ax.set_aspect("equal")
    ax.set_title(f"{label} on chart {chart_id}")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def emit_plot_data(grids, points, out_dir, stem, label="|section|",
                   render_figures=True):
    """Write CSV grids plus a points file, and render one PNG per chart.

    ``grids`` maps chart ids to (u, v, value) arrays, as produced by
    sample_section_grids; ``points`` is a list of located zeros.  Returns the
    list of files written.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for chart_id, (u, v, value) in grids.items():
        csv_path = os.path.join(out_dir, f"{stem}_grid_{chart_id}.csv")
        _write_grid_csv(csv_path, u, v, value)
        written.append(csv_path)
        if render_figures:
            png_path = os.path.join(out_dir, f"{stem}_{chart_id}.png")
            _render_figure(png_path, chart_id, u, v, value, points, label)
            written.append(png_path)
    points_path = os.path.join(out_dir, f"{stem}_points.csv")
    _write_points_csv(points_path, points)
    written.append(points_path)
    return written
