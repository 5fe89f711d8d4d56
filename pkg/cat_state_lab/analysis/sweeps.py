from typing import Callable, Iterable, List, Optional, TypeVar
from concurrent.futures import ThreadPoolExecutor
import contextvars
import logging
import sys

from tqdm import tqdm

from ..config.settings import SimulationConfig
from ..errors import CatLabError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class SweepRunner:
    """Evaluate a pure function over a parameter sweep on a thread pool, keeping sweep order."""

    def __init__(self, max_workers: Optional[int] = None, progress: Optional[bool] = None):
        self.max_workers = max_workers or SimulationConfig.SWEEP_WORKERS
        self.progress = sys.stderr.isatty() if progress is None else progress

    def map(self, fn: Callable[[T], R], items: Iterable[T], desc: str = "sweep") -> List[R]:
        items = list(items)
        results: List[Optional[R]] = [None] * len(items)
        if self.max_workers <= 1 or len(items) <= 1:
            for idx, item in enumerate(tqdm(items, desc=desc, disable=not self.progress, file=sys.stderr)):
                results[idx] = self._call(fn, item, desc)
            return results
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            # worker threads do not inherit context variables such as the tail tolerance
            futures = [
                executor.submit(contextvars.copy_context().run, self._call, fn, item, desc) for item in items
            ]
            for idx, future in enumerate(tqdm(futures, desc=desc, disable=not self.progress, file=sys.stderr)):
                results[idx] = future.result()
        return results

    @staticmethod
    def _call(fn: Callable[[T], R], item: T, desc: str) -> R:
        try:
            return fn(item)
        except CatLabError as e:
            logger.error(f"{desc} failed at {item!r}: {str(e)}")
            raise
