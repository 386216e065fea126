"""Run independent simulations serially or in worker processes."""

from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor


def parallel_map[T, R](fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """
    Map `fn` over `items`, preserving order.

    `fn` and the items must be picklable when `workers` > 1; every item
    carries its own seed, so the result does not depend on the worker count.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as executor:
        return list(executor.map(fn, items))
