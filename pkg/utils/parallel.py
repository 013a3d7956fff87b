import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

import numpy as np

from utils.errors import InvalidArgumentError

T = TypeVar("T")
logger = logging.getLogger(__name__)


class ChunkedExecutor:
    """Runs batched work over a fixed chunk plan.

    The split into chunks depends only on ``chunk_size`` and results are
    collected in chunk order, so the numbers produced are identical whatever
    the thread count.
    """

    def __init__(self, threads: int = 1, chunk_size: int = 512):
        if threads < 1:
            raise InvalidArgumentError(f"threads must be >= 1, got {threads}")
        if chunk_size < 1:
            raise InvalidArgumentError(f"chunk_size must be >= 1, got {chunk_size}")
        self.threads = threads
        self.chunk_size = chunk_size

    def plan(self, n_items: int) -> List[slice]:
        return [slice(start, min(start + self.chunk_size, n_items))
                for start in range(0, n_items, self.chunk_size)]

    def map(self, func: Callable[[slice], T], n_items: int) -> List[T]:
        chunks = self.plan(n_items)
        if self.threads == 1 or len(chunks) <= 1:
            return [func(chunk) for chunk in chunks]
        logger.debug(f"Dispatching {len(chunks)} chunks on {self.threads} threads")
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(func, chunks))

    def map_array(self, func: Callable[[np.ndarray], np.ndarray], rows: np.ndarray) -> np.ndarray:
        """Apply ``func`` to consecutive row blocks of ``rows`` and stack the results."""
        rows = np.asarray(rows)
        if rows.shape[0] == 0:
            return func(rows)
        parts = self.map(lambda chunk: func(rows[chunk]), rows.shape[0])
        return np.concatenate(parts, axis=0)

    def run_all(self, tasks: Sequence[Callable[[], T]]) -> List[T]:
        """Evaluate independent thunks, returning results in submission order."""
        if self.threads == 1 or len(tasks) <= 1:
            return [task() for task in tasks]
        with ThreadPoolExecutor(max_workers=min(self.threads, len(tasks))) as pool:
            futures = [pool.submit(task) for task in tasks]
            return [future.result() for future in futures]
