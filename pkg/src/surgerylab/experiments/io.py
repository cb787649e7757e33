"""CSV and SVG output shared by the experiment runners."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

__all__ = ["format_value", "write_rows", "read_rows", "svg_from_csv", "module_versions"]


def module_versions() -> dict:
    import scipy

    from .. import __version__
    return {"surgerylab": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def format_value(v) -> str:
    """Stable text for CSV cells (``repr`` for floats)."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return str(v)


def write_rows(path, columns: list, rows: list) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([format_value(r.get(c)) for c in columns])


def read_rows(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _float(s):
    try:
        v = float(s)
    except (TypeError, ValueError):
        return math.nan
    return v


def svg_from_csv(csv_path, x: str, ys: list, out_path, title: str = "",
                 loglog: bool = True) -> None:
    """Plot columns of a CSV file to a deterministic SVG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = read_rows(csv_path)
    xv = np.array([_float(r[x]) for r in rows])
    with matplotlib.rc_context({"svg.hashsalt": "surgerylab", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for col in ys:
            yv = np.array([_float(r[col]) for r in rows])
            ok = np.isfinite(xv) & np.isfinite(yv) & (yv > 0 if loglog else True)
            ax.plot(xv[ok], yv[ok], marker="o", label=col)
        if loglog:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel(x)
        ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        fig.savefig(Path(out_path), format="svg", metadata={"Date": None})
        plt.close(fig)
