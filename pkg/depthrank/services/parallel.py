"""
Ordered fan-out over worker processes.

Work is cut into chunks, each chunk runs with BLAS limited to one thread,
and results come back in submission order. Reductions done by callers on
the returned list are therefore independent of the worker count.
"""

import logging
import sys
from typing import Any, Callable, List, Optional, Sequence, Tuple

from joblib import Parallel, delayed
from threadpoolctl import threadpool_limits
from tqdm import tqdm

from depthrank.core.config import settings

logger = logging.getLogger(__name__)


def chunk_ranges(total: int, size: int) -> List[Tuple[int, int]]:
    """Half-open index ranges [start, stop) covering range(total)."""
    size = max(1, int(size))
    return [(start, min(start + size, total)) for start in range(0, total, size)]


def _single_threaded(func: Callable, task: Any) -> Any:
    with threadpool_limits(limits=1):
        return func(task)


def ordered_map(
    func: Callable[[Any], Any],
    tasks: Sequence[Any],
    n_jobs: Optional[int] = None,
    desc: Optional[str] = None,
) -> List[Any]:
    """Apply func to every task, in parallel, preserving task order."""
    jobs = settings.resolved_threads(n_jobs)
    show = desc is not None and sys.stderr.isatty()

    if jobs == 1 or len(tasks) <= 1:
        iterator = (func(task) for task in tasks)
    else:
        logger.debug(f"Dispatching {len(tasks)} tasks to {jobs} workers")
        iterator = Parallel(n_jobs=jobs, return_as="generator")(
            delayed(_single_threaded)(func, task) for task in tasks
        )
    return list(tqdm(iterator, total=len(tasks), desc=desc, disable=not show, file=sys.stderr))
