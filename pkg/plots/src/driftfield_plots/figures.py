"""Panel figures from driftfield run directories.

The renderer consumes only the CLI file contracts: a summary.json listing
grid cells, per-cell trajectory/cloud CSVs with coord_* columns, and
records.csv convergence tables. Grids are laid out with one row per
temperature and one column per scheme; generated points draw in orange over
the target in blue. Output is deterministic: the same inputs render to
byte-identical files.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

GENERATED_COLOR = "tab:orange"
TARGET_COLOR = "tab:blue"
SCHEME_ORDER = ("one-sided", "two-sided", "sinkhorn")
SCHEME_COLORS = {"one-sided": "#d62728", "two-sided": "#2ca02c", "sinkhorn": "#9467bd"}
TAU_LINESTYLES = ("-", "--", ":", "-.")

# fixed style so rerenders are byte-identical regardless of user config
_RC = {
    "svg.hashsalt": "driftfield-plots",
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "font.size": 9,
    "axes.titlesize": 9,
    "axes.labelsize": 8,
    "xtick.labelsize": 7,
    "ytick.labelsize": 7,
    "legend.fontsize": 7,
}


class FigureKind(str, Enum):
    TRAJECTORY_GRID = "trajectory-grid"
    SCATTER_GRID = "scatter-grid"
    CONVERGENCE_CURVES = "convergence-curves"


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: an input run directory, a kind, an output path.

    scheme_order fixes the column ordering; raster switches the output from
    the default vector SVG to PNG when the output suffix does not already
    decide the format.
    """

    indir: Path
    kind: FigureKind
    out: Path | None = None
    scheme_order: tuple[str, ...] = SCHEME_ORDER
    raster: bool = False

    def __post_init__(self):
        object.__setattr__(self, "indir", Path(self.indir))
        object.__setattr__(self, "kind", FigureKind(self.kind))
        out = Path(self.out) if self.out is not None else self._default_out()
        if not out.suffix:
            out = out.with_suffix(".png" if self.raster else ".svg")
        object.__setattr__(self, "out", out)
        if not self.scheme_order:
            raise ValueError("scheme_order must name at least one scheme")

    def _default_out(self) -> Path:
        return self.indir / f"{self.kind.value}"


def read_summary(indir: Path) -> dict:
    path = Path(indir) / "summary.json"
    if not path.exists():
        raise FileNotFoundError(f"{path}: no summary.json; point --indir at a run directory")
    with open(path, "r", encoding="utf-8") as fh:
        summary = json.load(fh)
    if "cells" not in summary or not isinstance(summary["cells"], list):
        raise ValueError(f"{path}: summary has no cell list")
    if not summary["cells"]:
        raise ValueError(f"{path}: summary lists no cells, nothing to draw")
    return summary


def read_cloud_csv(path: Path) -> np.ndarray:
    """Points from coord_* columns, shape (n, d)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ValueError(f"{path}: empty CSV")
        idx = [i for i, name in enumerate(header) if name.startswith("coord_")]
        if not idx:
            raise ValueError(f"{path}: no coord_* columns in {header}")
        rows = [[float(row[i]) for i in idx] for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def read_trajectory_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Snapshot stack from (step, particle_id, coord_*) rows.

    Returns (steps, paths) where paths has shape (n_steps, n_particles, d)
    and rows are ordered by recorded step.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ValueError(f"{path}: empty CSV")
        try:
            step_i = header.index("step")
            pid_i = header.index("particle_id")
        except ValueError as exc:
            raise ValueError(f"{path}: missing step/particle_id columns") from exc
        coord_i = [i for i, name in enumerate(header) if name.startswith("coord_")]
        if not coord_i:
            raise ValueError(f"{path}: no coord_* columns")
        by_step: dict[int, dict[int, list[float]]] = {}
        for row in reader:
            if not row:
                continue
            by_step.setdefault(int(row[step_i]), {})[int(row[pid_i])] = [
                float(row[i]) for i in coord_i
            ]
    steps = sorted(by_step)
    if not steps:
        raise ValueError(f"{path}: no data rows")
    n = len(by_step[steps[0]])
    paths = np.asarray(
        [[by_step[s][p] for p in range(n)] for s in steps], dtype=np.float64
    )
    return np.asarray(steps), paths


def read_records_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """(iterations, w2sq) columns of a training record table."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or "iteration" not in header or "w2sq" not in header:
            raise ValueError(f"{path}: not a records CSV: {header}")
        it_i, w2_i = header.index("iteration"), header.index("w2sq")
        its, w2s = [], []
        for row in reader:
            if not row:
                continue
            its.append(int(row[it_i]))
            w2s.append(float(row[w2_i]))
    return np.asarray(its), np.asarray(w2s)


def _cells_by_key(summary: dict) -> dict:
    """Index cells by (target, scheme, tau); trajectory grids carry masked
    duplicates, resolved in favor of each scheme's conventional variant
    (masked for the softmax schemes, unmasked for sinkhorn)."""
    index: dict = {}
    for cell in summary["cells"]:
        key = (cell.get("target"), cell["scheme"], float(cell["tau"]))
        prev = index.get(key)
        if prev is None:
            index[key] = cell
            continue
        prefer_masked = cell["scheme"] != "sinkhorn"
        if bool(cell.get("masked")) == prefer_masked:
            index[key] = cell
    return index


def _grid_axes(index: dict, scheme_order) -> tuple[list, list[str]]:
    """Row keys (target, tau) in target-then-tau order, and the scheme
    columns restricted to what the run actually contains."""
    targets = sorted({t for t, _, _ in index}, key=lambda t: (t is not None, t))
    taus = sorted({tau for _, _, tau in index})
    rows = [(t, tau) for t in targets for tau in taus]
    present = {s for _, s, _ in index}
    cols = [s for s in scheme_order if s in present]
    cols += sorted(present - set(cols))
    return rows, cols


def _row_label(target, tau) -> str:
    prefix = f"{target}, " if target is not None else ""
    return f"{prefix}tau={tau:g}"


def _placeholder(ax, slug_hint: str) -> None:
    ax.text(0.5, 0.5, "missing cell", ha="center", va="center",
            transform=ax.transAxes, color="0.5")
    ax.set_xticks([])
    ax.set_yticks([])
    warnings.warn(f"no cell for {slug_hint}; rendered a placeholder", RuntimeWarning)


def _cell_dir(indir: Path, cell: dict) -> Path:
    return Path(indir) / cell["slug"]


def _panel_grid(n_rows: int, n_cols: int):
    fig, axes = plt.subplots(
        n_rows, n_cols,
        figsize=(2.4 * n_cols, 2.4 * n_rows),
        squeeze=False,
        constrained_layout=True,
    )
    return fig, axes


def _render_trajectory_grid(spec: FigureSpec, summary: dict):
    index = _cells_by_key(summary)
    rows, cols = _grid_axes(index, spec.scheme_order)
    fig, axes = _panel_grid(len(rows), len(cols))
    for r, (target, tau) in enumerate(rows):
        for c, scheme in enumerate(cols):
            ax = axes[r][c]
            cell = index.get((target, scheme, tau))
            if cell is None or cell.get("error"):
                _placeholder(ax, f"{scheme} at {_row_label(target, tau)}")
            else:
                cell_dir = _cell_dir(spec.indir, cell)
                try:
                    _, paths = read_trajectory_csv(cell_dir / "trajectory.csv")
                    target_pts = read_cloud_csv(cell_dir / "target.csv")
                except (OSError, ValueError) as exc:
                    warnings.warn(f"{cell['slug']}: {exc}", RuntimeWarning)
                    _placeholder(ax, cell["slug"])
                    target_pts = None
                    paths = None
                if paths is not None:
                    _draw_trajectories(ax, paths, target_pts)
            if r == 0:
                ax.set_title(scheme)
            if c == 0:
                ax.set_ylabel(_row_label(target, tau))
    return fig


def _draw_trajectories(ax, paths: np.ndarray, target_pts: np.ndarray) -> None:
    if paths.shape[2] != 2:
        raise ValueError(f"trajectory panels need 2-d coordinates, got d={paths.shape[2]}")
    ax.scatter(target_pts[:, 0], target_pts[:, 1], s=4, color=TARGET_COLOR,
               linewidths=0, zorder=1)
    for p in range(paths.shape[1]):
        ax.plot(paths[:, p, 0], paths[:, p, 1], color=GENERATED_COLOR,
                linewidth=0.5, alpha=0.5, zorder=2)
    ax.scatter(paths[-1, :, 0], paths[-1, :, 1], s=4, color=GENERATED_COLOR,
               linewidths=0, zorder=3)
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xticks([])
    ax.set_yticks([])


def _render_scatter_grid(spec: FigureSpec, summary: dict):
    index = _cells_by_key(summary)
    rows, cols = _grid_axes(index, spec.scheme_order)
    fig, axes = _panel_grid(len(rows), len(cols))
    for r, (target, tau) in enumerate(rows):
        for c, scheme in enumerate(cols):
            ax = axes[r][c]
            cell = index.get((target, scheme, tau))
            if cell is None or cell.get("error"):
                _placeholder(ax, f"{scheme} at {_row_label(target, tau)}")
            else:
                cell_dir = _cell_dir(spec.indir, cell)
                try:
                    generated = read_cloud_csv(cell_dir / "final_samples.csv")
                    target_pts = read_cloud_csv(cell_dir / "target_samples.csv")
                except (OSError, ValueError) as exc:
                    warnings.warn(f"{cell['slug']}: {exc}", RuntimeWarning)
                    _placeholder(ax, cell["slug"])
                    generated = None
                if generated is not None:
                    _draw_scatter(ax, generated, target_pts)
            if r == 0:
                ax.set_title(scheme)
            if c == 0:
                ax.set_ylabel(_row_label(target, tau))
    return fig


def _draw_scatter(ax, generated: np.ndarray, target_pts: np.ndarray) -> None:
    if generated.shape[1] != 2:
        raise ValueError(f"scatter panels need 2-d coordinates, got d={generated.shape[1]}")
    ax.scatter(target_pts[:, 0], target_pts[:, 1], s=4, color=TARGET_COLOR,
               linewidths=0, zorder=1)
    ax.scatter(generated[:, 0], generated[:, 1], s=4, color=GENERATED_COLOR,
               linewidths=0, zorder=2)
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xticks([])
    ax.set_yticks([])


def _render_convergence(spec: FigureSpec, summary: dict):
    index = _cells_by_key(summary)
    targets = sorted({t for t, _, _ in index}, key=lambda t: (t is not None, t))
    taus = sorted({tau for _, _, tau in index})
    _, cols = _grid_axes(index, spec.scheme_order)
    fig, axes = _panel_grid(1, len(targets))
    any_curve = False
    for c, target in enumerate(targets):
        ax = axes[0][c]
        for scheme in cols:
            for k, tau in enumerate(taus):
                cell = index.get((target, scheme, tau))
                if cell is None or cell.get("error"):
                    _placeholder_line_warning(target, scheme, tau)
                    continue
                try:
                    its, w2s = read_records_csv(_cell_dir(spec.indir, cell) / "records.csv")
                except (OSError, ValueError) as exc:
                    warnings.warn(f"{cell['slug']}: {exc}", RuntimeWarning)
                    continue
                label = scheme if len(taus) == 1 else f"{scheme}, tau={tau:g}"
                ax.plot(its, w2s, color=SCHEME_COLORS.get(scheme, "0.3"),
                        linestyle=TAU_LINESTYLES[k % len(TAU_LINESTYLES)],
                        linewidth=1.0, label=label)
                any_curve = True
        if ax.lines:
            # convergence spans orders of magnitude; log axis unless data hits zero
            if min(line.get_ydata().min() for line in ax.lines) > 0:
                ax.set_yscale("log")
            ax.legend(loc="upper right")
        else:
            _placeholder(ax, f"target {target}")
        ax.set_title(str(target) if target is not None else "run")
        ax.set_xlabel("iteration")
        if c == 0:
            ax.set_ylabel("squared Wasserstein distance")
    if not any_curve:
        warnings.warn("no convergence records found; figure holds placeholders only",
                      RuntimeWarning)
    return fig


def _placeholder_line_warning(target, scheme, tau) -> None:
    warnings.warn(
        f"no records for {scheme} at {_row_label(target, tau)}; curve skipped",
        RuntimeWarning,
    )


def build_figure(spec: FigureSpec):
    """Assemble the figure for a spec without saving it.

    Callers own the returned figure and should close it when done.
    """
    summary = read_summary(spec.indir)
    with matplotlib.rc_context(_RC):
        if spec.kind is FigureKind.TRAJECTORY_GRID:
            return _render_trajectory_grid(spec, summary)
        if spec.kind is FigureKind.SCATTER_GRID:
            return _render_scatter_grid(spec, summary)
        return _render_convergence(spec, summary)


def render(spec: FigureSpec) -> Path:
    """Render one figure to spec.out; returns the output path.

    Inputs are read only; rerendering the same inputs writes byte-identical
    files (fixed style, fixed hash salt, no timestamp metadata).
    """
    with matplotlib.rc_context(_RC):
        fig = build_figure(spec)
        try:
            spec.out.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(spec.out, metadata=_metadata_for(spec.out))
        finally:
            plt.close(fig)
    return spec.out


def _metadata_for(out: Path) -> dict:
    # strip volatile fields so identical inputs give identical bytes
    if out.suffix.lower() == ".svg":
        return {"Date": None}
    if out.suffix.lower() == ".png":
        return {"Software": None}
    return {}
