"""Small helper for distributing independent replicates across processes.

The worker count comes from the TVDN_THREADS environment variable when set,
otherwise from os.cpu_count(). Results are always gathered in submission
order, so parallel and serial runs produce identical output.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def worker_count(n_tasks: int) -> int:
    env = os.environ.get("TVDN_THREADS", "").strip()
    if env:
        k = max(1, int(env))
    else:
        k = os.cpu_count() or 1
    return max(1, min(k, n_tasks))


def parallel_map(fn, items):
    items = list(items)
    k = worker_count(len(items))
    if k <= 1 or len(items) <= 1:
        return [fn(a) for a in items]
    with ProcessPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))
