# src/nav_token_merging/core/decorators/op_counter.py
from collections import Counter
from functools import wraps
from threading import Lock
from typing import Callable, Optional


class OperationCounter:
    """Tallies calls to the numeric kernels it wraps, keyed by function name.

    Push-cost tests read the tally to check that each frame does a fixed amount
    of work. Increments take a lock, so kernels called from a thread pool are
    counted exactly; worker processes each keep their own tally.
    """

    def __init__(self, counts: Optional[Counter] = None):
        # an injected Counter lets tests watch the tally directly
        self.counts: Counter = Counter() if counts is None else counts
        self._lock = Lock()

    def __call__(self, func: Callable) -> Callable:
        name = func.__name__

        @wraps(func)
        def wrapper(*args, **kwargs):
            with self._lock:
                self.counts[name] += 1
            return func(*args, **kwargs)

        return wrapper

    def reset(self) -> None:
        with self._lock:
            self.counts.clear()

    def snapshot(self) -> dict[str, int]:
        """Calls per kernel name since the last reset."""
        with self._lock:
            return dict(self.counts)


count_operation = OperationCounter()
