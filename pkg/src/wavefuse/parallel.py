"""Process-wide thread setting for data-parallel loops.

Results always come back in input order so reductions stay bitwise
reproducible at a given thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

_threads = 1


def set_threads(n: int) -> None:
    global _threads
    if n < 1:
        raise ValueError(f"thread count must be positive, got {n}")
    _threads = n


def get_threads() -> int:
    return _threads


def ordered_map(fn, items) -> list:
    items = list(items)
    if _threads == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=_threads) as pool:
        return list(pool.map(fn, items))
