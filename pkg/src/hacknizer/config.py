"""Flat key=value config files for the multi-process launcher."""

from __future__ import annotations

from pathlib import Path

INT_KEYS = (
    "port",
    "seed",
    "token_ttl_s",
    "scrypt_n",
    "reservation_expiry_ms",
    "ack_timeout_ms",
    "bus_max_attempts",
)


def load_config(path: str | Path) -> dict:
    config: dict = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, value = line.split("=", 1)
        key, value = key.strip(), value.strip()
        config[key] = int(value) if key in INT_KEYS else value
    return config


def dump_config(config: dict) -> str:
    return "".join(f"{k}={v}\n" for k, v in sorted(config.items()))
