"""Login, lockout, sessions, and password management.

Lockout is a three-strike counter on the user record: the third failed
attempt locks the account and only a ManageUsers-privileged unlock (or a
successful login before the third strike) resets it.  Sessions expire
after 30 minutes of inactivity, boundary inclusive at exactly 30:00.
"""

from __future__ import annotations

import hashlib
import secrets
import string
from dataclasses import dataclass
from datetime import datetime, timedelta
from threading import RLock
from typing import Optional

from . import errors
from .accounts import find_user_by_code, user_effective_mask
from .clock import Clock
from .models import touch
from .permissions import Permission, level_of, mask_grants
from .store import Store

MAX_ATTEMPTS = 3
SESSION_TIMEOUT = timedelta(minutes=30)

_SCRYPT = dict(n=2**13, r=8, p=1)  # memory-hard KDF parameters


def hash_password(password: str, salt: Optional[str] = None) -> str:
    salt = salt or secrets.token_hex(8)
    digest = hashlib.scrypt(password.encode(), salt=salt.encode(), **_SCRYPT)
    return f"scrypt${salt}${digest.hex()[:32]}"


def verify_password(password: str, stored: str) -> bool:
    try:
        _, salt, _ = stored.split("$")
    except ValueError:
        return False
    return secrets.compare_digest(hash_password(password, salt), stored)


def check_password_policy(password: str) -> None:
    """At least 8 characters drawn from at least 2 character classes."""
    if len(password) < 8:
        raise errors.WeakPassword("password shorter than 8 characters")
    classes = sum(
        any(c in pool for c in password)
        for pool in (string.ascii_lowercase, string.ascii_uppercase,
                     string.digits, string.punctuation)
    )
    if classes < 2:
        raise errors.WeakPassword("password needs at least 2 character classes")


class ChallengeProvider:
    """Pluggable human-verification hook (stands in for a CAPTCHA)."""

    def issue(self, key: str) -> str:
        raise NotImplementedError

    def verify(self, key: str, answer: str) -> bool:
        raise NotImplementedError


class ArithmeticChallenge(ChallengeProvider):
    """Default provider: a small addition question per account."""

    def __init__(self):
        self._pending: dict[str, tuple[int, int]] = {}
        self._lock = RLock()

    def issue(self, key: str) -> str:
        with self._lock:
            a, b = secrets.randbelow(9) + 1, secrets.randbelow(9) + 1
            self._pending[key] = (a, b)
            return f"What is {a} + {b}?"

    def verify(self, key: str, answer: str) -> bool:
        with self._lock:
            pending = self._pending.pop(key, None)
        if pending is None:
            return False
        try:
            return int(answer.strip()) == pending[0] + pending[1]
        except ValueError:
            return False


@dataclass
class Session:
    token: str
    user_id: str
    user_code: str
    effective_mask: int
    level: int
    created_at: datetime
    last_activity: datetime
    must_change_password: bool = False


class SessionManager:
    """Token-keyed session registry; safe under concurrent access."""

    def __init__(self, clock: Clock, timeout: timedelta = SESSION_TIMEOUT):
        self._clock = clock
        self._timeout = timeout
        self._sessions: dict[str, Session] = {}
        self._lock = RLock()

    def create(self, user_id: str, user_code: str, mask: int,
               must_change_password: bool = False) -> Session:
        now = self._clock.now()
        token = secrets.token_hex(16)
        session = Session(token, user_id, user_code, mask, level_of(mask),
                          now, now, must_change_password)
        with self._lock:
            self._sessions[token] = session
        return session

    def get(self, token: str) -> Session:
        """Fetch without touching; expired sessions are dropped."""
        with self._lock:
            session = self._sessions.get(token)
            if session is None:
                raise errors.UnknownSession()
            if self._clock.now() - session.last_activity > self._timeout:
                del self._sessions[token]
                raise errors.SessionExpired()
            return session

    def touch(self, token: str) -> Session:
        with self._lock:
            session = self.get(token)
            session.last_activity = self._clock.now()
            return session

    def drop(self, token: str) -> Session:
        with self._lock:
            session = self.get(token)
            del self._sessions[token]
            return session

    def refresh_mask(self, user_id: str, mask: int) -> None:
        with self._lock:
            for session in self._sessions.values():
                if session.user_id == user_id:
                    session.effective_mask = mask
                    session.level = level_of(mask)


class AuthService:
    def __init__(self, store: Store, sessions: SessionManager, clock: Clock,
                 challenge: Optional[ChallengeProvider] = None,
                 challenge_for_elevated: bool = False,
                 max_attempts: int = MAX_ATTEMPTS):
        self._store = store
        self._sessions = sessions
        self._clock = clock
        self._challenge = challenge or ArithmeticChallenge()
        self._challenge_for_elevated = challenge_for_elevated
        self._max_attempts = max_attempts
        self._login_lock = RLock()  # serializes attempt counting

    # -- login / logout --

    def login(self, user_code: str, password: str,
              challenge_answer: Optional[str] = None) -> Session:
        with self._login_lock:
            return self._login_locked(user_code, password, challenge_answer)

    def _login_locked(self, user_code, password, challenge_answer):
        snap = self._store.snapshot()
        user = find_user_by_code(snap, user_code)
        if user is None:
            raise errors.InvalidCredentials("unknown account")
        if user.login_attempts >= self._max_attempts:
            raise errors.AccountLocked("admin unlock required")
        mask = user_effective_mask(snap, user.user_id)
        needs_challenge = user.login_attempts >= 1 or (
            self._challenge_for_elevated and level_of(mask) >= 2
        )
        if needs_challenge:
            if challenge_answer is None:
                question = self._challenge.issue(user_code)
                raise errors.ChallengeRequired(question, question=question)
            if not self._challenge.verify(user_code, challenge_answer):
                raise errors.ChallengeFailed("challenge answer rejected")
        if not verify_password(password, user.password_digest):
            with self._store.transaction(actor=user.user_id) as txn:
                txn.put("user", touch(user, login_attempts=user.login_attempts + 1))
                txn.log(user.user_id, "LOGIN", "failed attempt")
            raise errors.InvalidCredentials("bad password")
        with self._store.transaction(actor=user.user_id) as txn:
            if user.login_attempts != 0:
                txn.put("user", touch(user, login_attempts=0))
            txn.log(user.user_id, "LOGIN", f"user {user_code} logged in")
        return self._sessions.create(
            user.user_id, user.user_code, mask,
            must_change_password=bool(user.must_change_password),
        )

    def logout(self, token: str) -> None:
        session = self._sessions.drop(token)
        with self._store.transaction(actor=session.user_id) as txn:
            txn.log(session.user_id, "LOGOUT", f"user {session.user_code} logged out")

    def require(self, token: str) -> Session:
        """Validate and touch; the per-request gate used by the gateway."""
        return self._sessions.touch(token)

    def touch(self, token: str) -> Session:
        return self._sessions.touch(token)

    # -- password management --

    def change_password(self, token: str, old: str, new1: str, new2: str) -> None:
        session = self._sessions.touch(token)
        user = self._store.get("user", session.user_id)
        if not verify_password(old, user.password_digest):
            raise errors.OldPasswordMismatch()
        if new1 != new2:
            raise errors.NewPasswordsDiffer()
        check_password_policy(new1)
        with self._store.transaction(actor=user.user_id) as txn:
            txn.put("user", touch(user, password_digest=hash_password(new1),
                                  must_change_password=0))
            txn.log(user.user_id, "UPDATE", "password changed")
        session.must_change_password = False

    def unlock_user(self, token: str, user_code: str) -> None:
        session = self._sessions.touch(token)
        if not mask_grants(session.effective_mask, Permission.MANAGE_USERS):
            raise errors.PermissionDenied("ManageUsers required to unlock")
        user = find_user_by_code(self._store.snapshot(), user_code)
        if user is None:
            raise errors.ValidationError(f"unknown user {user_code}")
        with self._store.transaction(actor=session.user_id) as txn:
            txn.put("user", touch(user, login_attempts=0))
            txn.log(user.user_id, "UPDATE", f"account {user_code} unlocked")
