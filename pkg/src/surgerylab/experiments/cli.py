"""Command-line entry point: ``surgerylab <subcommand> --config PATH``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config, validate_config
from .fit import fit_slope
from .golden import run_bound_calculators
from .io import read_rows
from .net import run_net_convergence
from .pipe import run_pipe_convergence

__all__ = ["main", "build_parser"]

_KINDS = {"pipe-sweep": "pipe", "net-sweep": "net", "bounds-golden": "golden", "slope": "slope"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="surgerylab",
                                description="Metric surgery sweeps and flat-distance bounds.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("pipe-sweep", "rho sweep of the single-pair pipe construction"),
                        ("net-sweep", "eps sweep of strings and tunnels on a net"),
                        ("bounds-golden", "evaluate the bound calculators on a golden table"),
                        ("slope", "fit a log-log slope to two CSV columns")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", type=Path, help="JSON config (defaults if omitted)")
        s.add_argument("--out", type=Path, help="output directory (overrides the config)")
        s.add_argument("--workers", type=int, default=1, help="worker processes")
        s.add_argument("--seed", type=int, help="seed (overrides the config)")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def _slope(cfg: dict, out: Path) -> dict:
    base = Path(cfg.get("_config_dir", "."))
    rows = read_rows(base / cfg["csv"])
    rows = [r for r in rows if r.get("status", "ok") == "ok"]
    fit = fit_slope([float(r[cfg["x"]]) for r in rows], [float(r[cfg["y"]]) for r in rows])
    ok = True
    if cfg["min_slope"] is not None:
        ok &= fit.slope >= float(cfg["min_slope"])
    if cfg["min_r2"] is not None:
        ok &= fit.r2 >= float(cfg["min_r2"])
    summary = {"name": cfg["name"], "fit": fit.as_dict(), "passed": bool(ok)}
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    return summary


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    kind = _KINDS[args.command]
    try:
        cfg = load_config(args.config, kind) if args.config else validate_config({}, kind)
        if args.seed is not None:
            if args.seed < 0 or args.seed >= 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
            cfg["seed"] = args.seed
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = args.out or Path(cfg["output"])
    if kind == "pipe":
        summary = run_pipe_convergence(cfg, out, args.workers)
    elif kind == "net":
        summary = run_net_convergence(cfg, out, args.workers)
    elif kind == "golden":
        summary = run_bound_calculators(cfg, out)
    else:
        try:
            summary = _slope(cfg, out)
        except (ValueError, KeyError) as exc:
            print(f"slope error: {exc}", file=sys.stderr)
            return 2
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0 if summary.get("passed") else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
