"""Identifier generation funneled through one seeded random source."""

from __future__ import annotations

import os
import random


class IdSource:
    """128-bit random identifiers, lowercase hex with hyphens (uuid layout).

    All randomness in a composed system flows through the one Random given
    here, so a seed fully determines every generated id.
    """

    def __init__(self, rng: random.Random | None = None):
        self.rng = rng if rng is not None else random.Random(int.from_bytes(os.urandom(8), "big"))

    def event_id(self) -> str:
        h = f"{self.rng.getrandbits(128):032x}"
        return f"{h[0:8]}-{h[8:12]}-{h[12:16]}-{h[16:20]}-{h[20:32]}"

    def entity_id(self, prefix: str) -> str:
        return f"{prefix}-{self.rng.getrandbits(48):012x}"

    def salt(self, nbytes: int = 16) -> bytes:
        return self.rng.getrandbits(nbytes * 8).to_bytes(nbytes, "big")
