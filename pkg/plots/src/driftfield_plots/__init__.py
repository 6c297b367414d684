"""Figure rendering for driftfield run directories."""

from .figures import (
    SCHEME_ORDER,
    FigureKind,
    FigureSpec,
    build_figure,
    read_cloud_csv,
    read_records_csv,
    read_summary,
    read_trajectory_csv,
    render,
)

__all__ = [
    "SCHEME_ORDER",
    "FigureKind",
    "FigureSpec",
    "build_figure",
    "read_cloud_csv",
    "read_records_csv",
    "read_summary",
    "read_trajectory_csv",
    "render",
]
