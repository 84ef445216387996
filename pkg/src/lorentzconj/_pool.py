"""Ordered parallel map with a configurable worker count."""

import os
from concurrent.futures import ThreadPoolExecutor

ENV_WORKERS = "LORENTZCONJ_WORKERS"


def default_workers():
    env = os.environ.get(ENV_WORKERS)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def ordered_map(fn, items, workers=None):
    """``list(map(fn, items))`` evaluated on a thread pool; result order is input order."""
    items = list(items)
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))
