"""Bearer tokens: three dot-separated base64url segments signed with HMAC-SHA256.

The gateway validates tokens with the shared secret alone, no callback to
the user service. Claims carry user_id, roles, and expiry in epoch ms.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import json

from hacknizer.errors import HacknizerError

HEADER = {"alg": "HS256", "typ": "hz-token"}


class TokenInvalid(HacknizerError):
    pass


def _b64e(raw: bytes) -> str:
    return base64.urlsafe_b64encode(raw).rstrip(b"=").decode("ascii")


def _b64d(segment: str) -> bytes:
    pad = "=" * (-len(segment) % 4)
    return base64.urlsafe_b64decode(segment + pad)


def issue_token(secret: str, user_id: str, roles: list[str], expires_at_ms: int) -> str:
    header = _b64e(json.dumps(HEADER, sort_keys=True, separators=(",", ":")).encode())
    claims = _b64e(
        json.dumps(
            {"user_id": user_id, "roles": sorted(roles), "exp_ms": expires_at_ms},
            sort_keys=True,
            separators=(",", ":"),
        ).encode()
    )
    signature = _b64e(_sign(secret, f"{header}.{claims}"))
    return f"{header}.{claims}.{signature}"


def verify_token(secret: str, token: str, now_ms: int) -> dict:
    """Returns the claims dict; raises TokenInvalid on any defect."""
    try:
        token.encode("ascii")
    except UnicodeEncodeError:
        raise TokenInvalid("token is not ascii")
    parts = token.split(".")
    if len(parts) != 3:
        raise TokenInvalid("token must have three segments")
    header, claims, signature = parts
    expected = _b64e(_sign(secret, f"{header}.{claims}"))
    if not hmac.compare_digest(expected.encode(), signature.encode()):
        raise TokenInvalid("bad signature")
    try:
        doc = json.loads(_b64d(claims))
    except (ValueError, UnicodeDecodeError) as exc:
        raise TokenInvalid(f"unparseable claims: {exc}")
    if not isinstance(doc, dict) or "user_id" not in doc or "exp_ms" not in doc:
        raise TokenInvalid("claims missing fields")
    if doc["exp_ms"] <= now_ms:
        raise TokenInvalid("expired")
    return doc


def _sign(secret: str, signing_input: str) -> bytes:
    return hmac.new(secret.encode(), signing_input.encode(), hashlib.sha256).digest()
