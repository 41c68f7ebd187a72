"""File-backed topic bus for multi-process runs.

Topics are append-only files of envelope lines in a shared broker directory;
consumer-group offsets live beside them. Offsets advance only after the
handler returns, so delivery is at-least-once across process restarts.
Wall-clock mode only; makes no determinism promise.
"""

from __future__ import annotations

import fcntl
import threading
import time
from pathlib import Path

from hacknizer.chassis.envelope import EventEnvelope

POLL_INTERVAL_S = 0.05


class FileBus:
    def __init__(self, broker_dir: str | Path):
        self.broker_dir = Path(broker_dir)
        (self.broker_dir / "topics").mkdir(parents=True, exist_ok=True)
        (self.broker_dir / "groups").mkdir(parents=True, exist_ok=True)
        self._threads: list[threading.Thread] = []
        self._stop = threading.Event()
        self.available = True

    def _topic_path(self, topic: str) -> Path:
        return self.broker_dir / "topics" / f"{topic}.log"

    def _offset_path(self, topic: str, group: str) -> Path:
        return self.broker_dir / "groups" / f"{group}__{topic}.offset"

    def publish(self, topic: str, envelope: EventEnvelope) -> None:
        if not topic:
            raise ValueError("empty topic")
        path = self._topic_path(topic)
        with open(path, "a", encoding="utf-8") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            fh.write(envelope.to_line() + "\n")
            fh.flush()
            fcntl.flock(fh, fcntl.LOCK_UN)

    def subscribe(self, topic: str, consumer_group: str, handler) -> None:
        thread = threading.Thread(
            target=self._poll_loop,
            args=(topic, consumer_group, handler),
            name=f"filebus-{consumer_group}-{topic}",
            daemon=True,
        )
        self._threads.append(thread)
        thread.start()

    def _poll_loop(self, topic: str, group: str, handler) -> None:
        offset_path = self._offset_path(topic, group)
        offset = int(offset_path.read_text()) if offset_path.exists() else 0
        while not self._stop.is_set():
            lines = self._read_from(topic, offset)
            if not lines:
                self._stop.wait(POLL_INTERVAL_S)
                continue
            for line in lines:
                try:
                    envelope = EventEnvelope.from_line(line)
                except ValueError:
                    offset += 1
                    continue
                try:
                    handler(envelope)
                except Exception:
                    time.sleep(POLL_INTERVAL_S)
                    break  # re-poll from the same offset: redelivery
                offset += 1
                offset_path.write_text(str(offset))

    def _read_from(self, topic: str, offset: int) -> list[str]:
        path = self._topic_path(topic)
        if not path.exists():
            return []
        with open(path, "r", encoding="utf-8") as fh:
            fcntl.flock(fh, fcntl.LOCK_SH)
            lines = [l for l in fh.read().splitlines() if l]
            fcntl.flock(fh, fcntl.LOCK_UN)
        return lines[offset:]

    def pending_for(self, consumer_group: str) -> int:
        pending = 0
        for offset_path in (self.broker_dir / "groups").glob(f"{consumer_group}__*.offset"):
            topic = offset_path.stem.split("__", 1)[1]
            consumed = int(offset_path.read_text() or 0)
            total = len(self._read_from(topic, 0))
            pending += max(0, total - consumed)
        return pending

    def stop(self) -> None:
        self._stop.set()
        for thread in self._threads:
            thread.join(timeout=1)
