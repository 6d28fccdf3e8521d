"""Small shared helpers."""

from __future__ import annotations

import os

__all__ = ["parallel_map", "resolve_threads"]


def resolve_threads(threads: int | None) -> int:
    """Thread count from the argument or the GLOBENV_THREADS variable."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("GLOBENV_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def parallel_map(fn, n_items: int, threads: int = 1) -> list:
    """Apply ``fn`` to 0..n_items-1, optionally on a thread pool.

    Results come back in index order, so the outcome does not depend on the
    thread count as long as ``fn(i)`` itself is deterministic.
    """
    threads = resolve_threads(threads)
    if threads <= 1 or n_items <= 1:
        return [fn(i) for i in range(n_items)]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_items)))
