"""Small shared helpers."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

#: environment variable capping worker threads (0 or unset = auto)
THREADS_ENV = "HOLONOMY_LAB_THREADS"


def thread_count(n_items: int) -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    auto = min(n_items, os.cpu_count() or 1)
    return auto if cap <= 0 else min(cap, auto)


def parallel_map(fn, items):
    """Map over independent work items, threading when allowed; results keep
    input order so callers stay deterministic."""
    items = list(items)
    k = thread_count(len(items))
    if k <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))
