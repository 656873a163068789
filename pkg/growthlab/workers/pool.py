from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Callable, Generator, Iterable, List, Optional, TypeVar

from growthlab.config.settings import settings

T = TypeVar("T")
R = TypeVar("R")


class WorkerPool:
    """Process-wide pool for per-radius work; results always come back in input order."""

    _executor: Optional[ThreadPoolExecutor] = None
    _pool_initialized: bool = False
    _max_workers: int = 1

    @classmethod
    def initialize_pool(cls, max_workers: Optional[int] = None):
        """Initialize the worker pool."""
        if not cls._pool_initialized:
            cls._max_workers = max(1, max_workers or settings.jobs)
            if cls._max_workers > 1:
                cls._executor = ThreadPoolExecutor(
                    max_workers=cls._max_workers, thread_name_prefix="growthlab")
            cls._pool_initialized = True

    @classmethod
    def close_pool(cls):
        """Shut the pool down and forget its size."""
        if cls._executor:
            cls._executor.shutdown(wait=True)
        cls._executor = None
        cls._pool_initialized = False
        cls._max_workers = 1

    @classmethod
    @contextmanager
    def session(cls, max_workers: Optional[int] = None) -> Generator[type, None, None]:
        """Pool sized for one run, closed on exit."""
        cls.close_pool()
        cls.initialize_pool(max_workers)
        try:
            yield cls
        finally:
            cls.close_pool()

    @classmethod
    def map(cls, function: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """Apply ``function`` to every item; serial when the pool has one worker."""
        if not cls._pool_initialized:
            cls.initialize_pool()
        items = list(items)
        if cls._executor is None or len(items) < 2:
            return [function(item) for item in items]
        return list(cls._executor.map(function, items))
