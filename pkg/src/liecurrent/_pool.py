"""Optional thread pool sized by LIECURRENT_THREADS (unset or 0: serial)."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV = "LIECURRENT_THREADS"


def worker_count() -> int:
    raw = os.environ.get(ENV, "").strip()
    if not raw:
        return 0
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV} must be a non-negative integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"{ENV} must be a non-negative integer, got {raw!r}")
    return n


def pmap(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Map preserving input order, so merged results are deterministic."""
    items = list(items)
    n = worker_count()
    if n <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
