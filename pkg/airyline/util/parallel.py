import logging
import os
from typing import Callable, Iterable, List, Optional

import dask

from airyline.errors import ConfigError

logger = logging.getLogger(__name__)

THREADS_ENV = "AIRYLINE_THREADS"


def default_threads() -> int:
    """
    Worker cap: ``$AIRYLINE_THREADS`` when set, else the CPU count.
    """
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError as error:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from error
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def parallel_map(
    func: Callable, items: Iterable, threads: Optional[int] = None
) -> List:
    """
    Evaluates ``func`` on every item with the dask threaded scheduler.
    Results come back in submission order.

    >>> parallel_map(gap_probability, configs, threads=4)
    """
    items = list(items)
    if not items:
        return []
    workers = threads if threads is not None else default_threads()
    if workers < 1:
        raise ConfigError(f"thread count must be positive, got {workers}")
    if workers == 1 or len(items) == 1:
        return [func(item) for item in items]
    tasks = [dask.delayed(func)(item) for item in items]
    logger.debug("evaluating %d tasks on %d threads", len(tasks), workers)
    return list(dask.compute(*tasks, scheduler="threads", num_workers=workers))
