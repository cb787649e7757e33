"""Golden tables for the closed-form bound calculators."""
from __future__ import annotations

import csv
import json
from importlib import resources
from pathlib import Path

from ..flat_bounds import LakzianSormaniInput, PreconditionError, hls_bound, lakzian_sormani_bound
from .io import format_value

__all__ = ["GOLDEN_COLUMNS", "evaluate_table", "run_bound_calculators", "default_table",
           "default_golden"]

GOLDEN_COLUMNS = ["row", "calc", "n", "alpha", "mass", "eps", "D_U1", "D_U2", "lam",
                  "vol_U1", "vol_U2", "vol_bdry_U1", "vol_bdry_U2", "vol_excess_1",
                  "vol_excess_2", "a", "h", "h_bar", "bound", "status"]

_LS_FIELDS = ["D_U1", "D_U2", "lam", "vol_U1", "vol_U2", "vol_bdry_U1", "vol_bdry_U2",
              "vol_excess_1", "vol_excess_2"]


def default_table() -> Path:
    return Path(str(resources.files("surgerylab") / "data" / "golden_table.csv"))


def default_golden() -> Path:
    return Path(str(resources.files("surgerylab") / "data" / "golden_expected.csv"))


def _num(s):
    return None if s in ("", None) else float(s)


def evaluate_table(table_path) -> list:
    """Evaluate every row of an input table; errors become status strings."""
    with open(table_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for k, r in enumerate(rows):
        res = {c: r.get(c, "") for c in GOLDEN_COLUMNS}
        res["row"] = str(k)
        try:
            if r["calc"] == "hls":
                res["bound"] = format_value(hls_bound(int(r["n"]), float(r["alpha"]),
                                                      float(r["mass"]), float(r["eps"])))
            elif r["calc"] == "ls":
                inp = LakzianSormaniInput(int(r["n"]), float(r["eps"]),
                                          *(float(r[f]) for f in _LS_FIELDS))
                rep = lakzian_sormani_bound(inp, _num(r.get("a")))
                res.update({"a": format_value(rep.a), "h": format_value(rep.h),
                            "h_bar": format_value(rep.h_bar), "bound": format_value(rep.bound)})
            else:
                raise ValueError(f"unknown calculator {r['calc']!r}")
            res["status"] = "ok"
        except PreconditionError as exc:
            res["status"] = f"error: {exc}"
        out.append(res)
    return out


def _write(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GOLDEN_COLUMNS)
        for r in rows:
            w.writerow([r.get(c, "") for c in GOLDEN_COLUMNS])


def run_bound_calculators(cfg: dict, out_dir=None) -> dict:
    """Evaluate the table and compare the output bytes with the golden file."""
    base = Path(cfg.get("_config_dir", "."))
    table = base / cfg["table"] if cfg["table"] else default_table()
    golden = base / cfg["golden"] if cfg["golden"] else default_golden()
    out = Path(out_dir or cfg["output"])
    out.mkdir(parents=True, exist_ok=True)
    rows = evaluate_table(table)
    result = out / "golden.csv"
    _write(result, rows)
    same = result.read_bytes() == Path(golden).read_bytes()
    summary = {"name": cfg["name"], "rows": len(rows), "golden": str(golden), "passed": same}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    return summary
