from __future__ import annotations

import time


class Timer:
    """
    Monotonic wall-clock stopwatch for benchmark phases.

    Reading `time` inside the block gives the running duration.
    """

    def __init__(self, *, process_only=False):
        self._time_func = time.process_time if process_only else time.perf_counter
        self._start_time: float | None = None
        self._end_time: float | None = None

    def __enter__(self) -> Timer:
        self._start_time = self._time_func()
        self._end_time = None
        return self

    def __exit__(self, *_):
        self._end_time = self._time_func()

    @property
    def time(self) -> float:
        if self._start_time is None:
            raise RuntimeError("Timer was never started")
        end_time = self._time_func() if self._end_time is None else self._end_time
        return end_time - self._start_time


def to_milliseconds(seconds: float) -> int:
    """
    >>> to_milliseconds(1.5), to_milliseconds(0.0004), to_milliseconds(2.0)
    (1500, 0, 2000)
    """
    return int(seconds * 1000 + 0.5)
