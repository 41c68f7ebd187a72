"""User management context (red): registration, authentication, roles.

Email uniqueness is enforced with a per-email reservation stream: the first
append at expected_version 0 wins, every racer gets DuplicateEmail. Password
hashes live in a private credentials stream that the outbox never publishes,
so hash material exists only inside this service's own log.
"""

from __future__ import annotations

import hashlib
import hmac
import re
from dataclasses import dataclass, replace

from hacknizer import auth
from hacknizer.chassis.aggregate import AggregateDefinition
from hacknizer.chassis.envelope import EventEnvelope
from hacknizer.errors import CommandRejected, VersionConflict, rejected
from hacknizer.services.base import Service, require_role

ROLES = ("organizer", "participant", "admin")
EMAIL_RE = re.compile(r"^[^@\s]+@[^@\s]+$")
MIN_PASSWORD_LEN = 8


@dataclass(frozen=True)
class UserAccount:
    user_id: str = ""
    email: str = ""
    display_name: str = ""
    roles: tuple[str, ...] = ()
    active: bool = True


def _apply_user(state: UserAccount, env: EventEnvelope) -> UserAccount:
    p = env.payload
    if env.event_type == "UserRegistered":
        return UserAccount(
            user_id=p["user_id"],
            email=p["email"],
            display_name=p["display_name"],
            roles=tuple(p["roles"]),
            active=True,
        )
    if env.event_type == "RoleAssigned":
        return replace(state, roles=tuple(sorted({*state.roles, p["role"]})))
    if env.event_type == "UserDeactivated":
        return replace(state, active=False)
    return state


def _apply_email_index(state: dict, env: EventEnvelope) -> dict:
    if env.event_type == "EmailReserved":
        return {"user_id": env.payload["user_id"]}
    return state


def _apply_credentials(state: dict, env: EventEnvelope) -> dict:
    if env.event_type == "CredentialSet":
        return {"password_hash": env.payload["password_hash"]}
    return state


USER_DEFINITION = AggregateDefinition("user", UserAccount, _apply_user)
EMAIL_INDEX_DEFINITION = AggregateDefinition("email_index", dict, _apply_email_index)
CREDENTIALS_DEFINITION = AggregateDefinition("user_cred", dict, _apply_credentials)


class UserService(Service):
    name = "user"
    owned_stream_types = ("user", "email_index", "user_cred")
    private_stream_types = ("user_cred",)
    definitions = {
        "user": USER_DEFINITION,
        "email_index": EMAIL_INDEX_DEFINITION,
        "user_cred": CREDENTIALS_DEFINITION,
    }

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.token_secret = self.config.get("token_secret", "dev-secret")
        self.token_ttl_s = int(self.config.get("token_ttl_s", 3600))
        self.scrypt_n = int(self.config.get("scrypt_n", 16384))
        self.commands = {
            "RegisterUser": self._cmd_register,
            "AuthenticateUser": self._cmd_authenticate,
            "AssignRole": self._cmd_assign_role,
        }

    def start(self) -> None:
        super().start()
        self._bootstrap_admin()

    def _bootstrap_admin(self) -> None:
        email = self.config.get("admin_email")
        password = self.config.get("admin_password")
        if not email or not password:
            return
        try:
            result = self.register_user(email, "Bootstrap Admin", password)
        except CommandRejected as err:
            if err.code != "DuplicateEmail":
                raise
            return
        admin_actor = {"user_id": result["user_id"], "roles": ["admin"]}
        self.assign_role(admin_actor, result["user_id"], "admin")

    # -- command adapters --------------------------------------------------

    def _cmd_register(self, p: dict) -> dict:
        return self.register_user(p["email"], p["display_name"], p["password"])

    def _cmd_authenticate(self, p: dict) -> dict:
        return self.authenticate(p["email"], p["password"])

    def _cmd_assign_role(self, p: dict) -> dict:
        return self.assign_role(p.get("actor") or {}, p["user_id"], p["role"])

    # -- operations ---------------------------------------------------------

    def register_user(self, email: str, display_name: str, password: str) -> dict:
        email = email.strip().lower()
        if not EMAIL_RE.match(email):
            raise rejected("InvalidEmail", email)
        if len(password) < MIN_PASSWORD_LEN:
            raise rejected("WeakPassword", f"need at least {MIN_PASSWORD_LEN} characters")
        user_id = self.ids.entity_id("usr")
        try:
            self.store.append(
                f"email::{email}",
                "email_index",
                0,
                [("EmailReserved", {"user_id": user_id, "email": email})],
            )
        except VersionConflict:
            raise rejected("DuplicateEmail", email)
        self.store.append(
            user_id,
            "user",
            0,
            [
                (
                    "UserRegistered",
                    {
                        "user_id": user_id,
                        "email": email,
                        "display_name": display_name,
                        "roles": ["participant"],
                    },
                )
            ],
        )
        self.store.append(
            f"cred::{user_id}",
            "user_cred",
            0,
            [("CredentialSet", {"password_hash": self._hash_password(password)})],
        )
        return {"user_id": user_id}

    def authenticate(self, email: str, password: str) -> dict:
        email = email.strip().lower()
        index, version = self.fold(EMAIL_INDEX_DEFINITION, f"email::{email}")
        if version == 0:
            raise rejected("InvalidCredentials")
        user_id = index["user_id"]
        account, _ = self.fold(USER_DEFINITION, user_id)
        creds, cred_version = self.fold(CREDENTIALS_DEFINITION, f"cred::{user_id}")
        if cred_version == 0 or not self._verify_password(password, creds["password_hash"]):
            raise rejected("InvalidCredentials")
        if not account.active:
            raise rejected("AccountInactive")
        expires_at = self.clock.now_ms() + self.token_ttl_s * 1000
        token = auth.issue_token(self.token_secret, user_id, list(account.roles), expires_at)
        return {
            "token": token,
            "user_id": user_id,
            "roles": sorted(account.roles),
            "expires_at_ms": expires_at,
        }

    def assign_role(self, actor: dict, user_id: str, role: str) -> dict:
        require_role({"actor": actor}, "admin")
        if role not in ROLES:
            raise rejected("UnknownRole", role)

        def attempt() -> dict:
            account, version = self.fold(USER_DEFINITION, user_id)
            if version == 0:
                raise rejected("UnknownUser", user_id)
            if role in account.roles:
                return {"user_id": user_id, "roles": sorted(account.roles)}
            self.store.append(user_id, "user", version, [("RoleAssigned", {"role": role})])
            return {"user_id": user_id, "roles": sorted({*account.roles, role})}

        return self.retry_append(attempt)

    def deactivate_user(self, actor: dict, user_id: str) -> dict:
        require_role({"actor": actor}, "admin")

        def attempt() -> dict:
            account, version = self.fold(USER_DEFINITION, user_id)
            if version == 0:
                raise rejected("UnknownUser", user_id)
            if account.active:
                self.store.append(user_id, "user", version, [("UserDeactivated", {})])
            return {"user_id": user_id, "active": False}

        return self.retry_append(attempt)

    def get_account(self, user_id: str) -> UserAccount | None:
        account, version = self.fold(USER_DEFINITION, user_id)
        return account if version else None

    # -- password hashing ----------------------------------------------------

    def _hash_password(self, password: str) -> str:
        salt = self.ids.salt(16)
        n, r, p = self.scrypt_n, 8, 1
        digest = hashlib.scrypt(password.encode(), salt=salt, n=n, r=r, p=p, dklen=32)
        return f"scrypt$n={n}$r={r}$p={p}${salt.hex()}${digest.hex()}"

    @staticmethod
    def _verify_password(password: str, encoded: str) -> bool:
        try:
            algo, n_s, r_s, p_s, salt_hex, digest_hex = encoded.split("$")
            if algo != "scrypt":
                return False
            n, r, p = (int(s.split("=")[1]) for s in (n_s, r_s, p_s))
            digest = hashlib.scrypt(
                password.encode(), salt=bytes.fromhex(salt_hex), n=n, r=r, p=p, dklen=32
            )
            return hmac.compare_digest(digest.hex(), digest_hex)
        except (ValueError, KeyError):
            return False
