"""Order-preserving execution of independent replica tasks."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def replica_map(fn, items, threads: int = 1) -> list:
    """Map fn over items, preserving order regardless of the thread budget.

    Tasks must be pure functions of their item; results are collected in
    input order, so aggregates downstream cannot depend on scheduling.
    The field kernels release the GIL, which is what makes threads useful.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))
