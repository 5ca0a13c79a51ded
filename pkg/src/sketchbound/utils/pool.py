"""Ordered work pool for Monte Carlo trials and grid points."""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from tqdm import tqdm

from sketchbound.utils.settings import get_settings

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(
    fn: Callable[[T], R],
    items: Iterable[T],
    threads: Optional[int] = None,
    progress: bool = False,
    desc: Optional[str] = None,
) -> List[R]:
    """Apply ``fn`` to every item and return results in input order.

    Args:
        fn: Pure function of one item (each item owns its RNG stream)
        items: Work items
        threads: Pool size; defaults to SKETCHBOUND_THREADS / CPU count, 1 runs inline
        progress: Show a tqdm bar
        desc: Progress bar label

    Returns:
        ``[fn(item) for item in items]``
    """
    items = list(items)
    workers = threads if threads is not None else get_settings().worker_count
    workers = max(1, min(workers, len(items) or 1))

    if workers == 1:
        iterator = tqdm(items, desc=desc, disable=not progress, leave=False)
        return [fn(item) for item in iterator]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        # executor.map yields in submission order regardless of completion order
        results = executor.map(fn, items)
        return list(tqdm(results, total=len(items), desc=desc, disable=not progress, leave=False))
