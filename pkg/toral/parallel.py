"""
Order-preserving thread pool sized by RECUR_THREADS.
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from config import settings

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def worker_count(threads: Optional[int] = None) -> int:
    """
    Resolve the number of worker threads.

    Args:
        threads (int, optional): Explicit cap; None reads RECUR_THREADS. 0 means one per CPU.

    Returns:
        int: At least 1.
    """
    requested = settings.RECUR_THREADS if threads is None else threads
    if requested <= 0:
        return os.cpu_count() or 1
    return requested


def parallel_map(function: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Apply function to every item, results in input order whatever the thread count.

    Args:
        function (Callable): Pure function of one item.
        items (Iterable): Work items.
        threads (int, optional): Worker cap, see worker_count.

    Returns:
        List: function(item) for each item, in order.
    """
    items = list(items)
    workers = min(worker_count(threads), max(len(items), 1))
    if workers == 1:
        return [function(item) for item in items]
    logger.debug(f"Running {len(items)} tasks on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(function, items))
