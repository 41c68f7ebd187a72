"""Injectable clocks. Every timestamp in the system comes from one of these."""

from __future__ import annotations

import time

# 2026-01-01T00:00:00Z; fixed origin so simulated runs are reproducible.
SIM_EPOCH_MS = 1_767_225_600_000


class SimulatedClock:
    """Clock that only moves when the scheduler advances it."""

    is_simulated = True

    def __init__(self, start_ms: int = SIM_EPOCH_MS):
        self._now = start_ms

    def now_ms(self) -> int:
        return self._now

    def advance_to(self, ms: int) -> None:
        if ms > self._now:
            self._now = ms


class WallClock:
    is_simulated = False

    def now_ms(self) -> int:
        return int(time.time() * 1000)

    def advance_to(self, ms: int) -> None:  # wall time advances itself
        pass
