"""Deterministic task scheduler driving all asynchrony in a composed system.

Every delivery, retry, and timer is a task keyed by (due_ms, seq). In
simulated mode the clock advances only here, jumping straight to the next
deadline, so timeout-driven behavior is testable in milliseconds. In wall
mode a pump thread executes due tasks against real time.
"""

from __future__ import annotations

import heapq
import threading
from typing import Callable

from hacknizer.errors import DrainTimeout


class _Task:
    __slots__ = ("due", "seq", "fn", "cancelled")

    def __init__(self, due: int, seq: int, fn: Callable[[], None]):
        self.due = due
        self.seq = seq
        self.fn = fn
        self.cancelled = False

    def __lt__(self, other: "_Task") -> bool:
        return (self.due, self.seq) < (other.due, other.seq)


class Scheduler:
    def __init__(self, clock, lock: threading.RLock | None = None):
        self.clock = clock
        self.lock = lock if lock is not None else threading.RLock()
        self._heap: list[_Task] = []
        self._seq = 0
        self._stop = threading.Event()

    def call_at(self, due_ms: int, fn: Callable[[], None]) -> _Task:
        with self.lock:
            self._seq += 1
            task = _Task(due_ms, self._seq, fn)
            heapq.heappush(self._heap, task)
            return task

    def call_later(self, delay_ms: int, fn: Callable[[], None]) -> _Task:
        return self.call_at(self.clock.now_ms() + max(0, delay_ms), fn)

    def cancel(self, task: _Task) -> None:
        task.cancelled = True

    def pending_count(self) -> int:
        with self.lock:
            return sum(1 for t in self._heap if not t.cancelled)

    def run_until_idle(self, max_steps: int = 1_000_000) -> int:
        """Execute tasks until none remain, advancing the simulated clock.

        Returns the number of tasks executed. Raises DrainTimeout when the
        step budget is exhausted (livelock signal).
        """
        steps = 0
        while True:
            with self.lock:
                task = self._pop_runnable()
                if task is None:
                    return steps
                if task.due > self.clock.now_ms():
                    self.clock.advance_to(task.due)
                steps += 1
                if steps > max_steps:
                    raise DrainTimeout(f"no quiescence after {max_steps} tasks")
                task.fn()

    def _pop_runnable(self) -> _Task | None:
        self._discard_cancelled()
        if self._heap:
            return heapq.heappop(self._heap)
        return None

    def _discard_cancelled(self) -> None:
        while self._heap and self._heap[0].cancelled:
            heapq.heappop(self._heap)

    # Wall-clock pump (multi-process / demo mode; no determinism promise).

    def pump_in_thread(self) -> threading.Thread:
        thread = threading.Thread(target=self._pump, name="scheduler-pump", daemon=True)
        thread.start()
        return thread

    def stop_pump(self) -> None:
        self._stop.set()

    def _pump(self) -> None:
        while not self._stop.is_set():
            with self.lock:
                task = None
                self._discard_cancelled()
                if self._heap and self._heap[0].due <= self.clock.now_ms():
                    task = heapq.heappop(self._heap)
                if task is not None:
                    task.fn()
                    continue
            self._stop.wait(0.005)
