"""Deterministic worker pool for sweep points."""
from __future__ import annotations

import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

__all__ = ["run_points"]


def run_points(fn: Callable[[dict, int], dict], cfg: dict, n: int, workers: int = 1) -> list:
    """Evaluate ``fn(cfg, k)`` for ``k < n`` and return rows in index order.

    With ``workers > 1`` points run in forked processes, so module-level state
    prepared by the caller is shared copy-on-write.
    """
    if workers <= 1 or n <= 1:
        return [fn(cfg, k) for k in range(n)]
    ctx = mp.get_context("fork")
    with ProcessPoolExecutor(max_workers=min(workers, n), mp_context=ctx) as pool:
        futures = [pool.submit(fn, cfg, k) for k in range(n)]
        return [f.result() for f in futures]
