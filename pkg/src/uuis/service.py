"""Service facade: configuration, bootstrap seeding, and the two-phase
confirmation broker that the HTTP gateway and CLI share.

A fresh store is seeded with the university affiliation, a level-3
administrator, default titles per level, a main building with one room,
a starter category tree, and the built-in request types.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from . import errors
from .assets import AssetService
from .audit import AuditService
from .auth import ArithmeticChallenge, AuthService, SessionManager, hash_password
from .backup import BackupScheduler, BackupService, Schedule
from .clock import Clock
from .directory import DirectoryService
from .ids import UNIVERSITY_ID, Family
from .models import (
    AclEntry,
    Affiliation,
    Building,
    Category,
    LocationType,
    Location,
    RequestType,
    Title,
    User,
    UserRole,
    now_iso,
)
from .permissions import (
    LEVEL_MASKS,
    Permission,
    mask_of,
)
from .search import SearchService
from .store import Store
from .workflow import WorkflowService


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8077
    storage_path: Optional[str] = None   # None = in-memory only
    backup_dir: str = "./backups"
    backup_schedule: str = "daily@00:00"
    backup_scope: str = "all"
    session_timeout_minutes: int = 30
    lockout_threshold: int = 3
    page_size: int = 50
    admin_code: str = "admin"
    admin_password: str = "ChangeMe!1"
    challenge_for_elevated: bool = False

    @classmethod
    def load(cls, path: str | Path | None = None,
             env: Optional[dict] = None) -> "ServiceConfig":
        """Config file keys overridden by UUIS_<KEY> environment vars."""
        data: dict[str, Any] = {}
        if path:
            data.update(json.loads(Path(path).read_text()))
        env = os.environ if env is None else env
        for name in cls.__dataclass_fields__:
            var = f"UUIS_{name.upper()}"
            if var in env:
                raw = env[var]
                kind = cls.__dataclass_fields__[name].type
                if kind == "int":
                    data[name] = int(raw)
                elif kind == "bool":
                    data[name] = raw.lower() in ("1", "true", "yes")
                else:
                    data[name] = raw
        return cls(**data)


@dataclass
class PendingConfirmation:
    """First phase of a confirmable action: consequence + one-shot token."""

    token: str
    action: str
    preview: str


class ConfirmationBroker:
    def __init__(self):
        self._pending: dict[str, str] = {}
        self._lock = threading.Lock()

    def issue(self, action: str, preview: str) -> PendingConfirmation:
        token = secrets.token_hex(16)
        with self._lock:
            self._pending[token] = action
        return PendingConfirmation(token, action, preview)

    def redeem(self, token: str, action: str) -> None:
        with self._lock:
            stored = self._pending.pop(token, None)
        if stored != action:
            raise errors.InvalidConfirmationToken(
                "confirmation token missing, spent, or for a different action")


# actions whose use cases gate the commit behind an explicit confirmation
CONFIRMABLE_ACTIONS = {
    "submit_request", "cancel_request", "update_assets", "bulk_add_assets",
    "group_assets", "approve_request", "reject_request",
}


class UuisService:
    """Everything wired together over one store."""

    def __init__(self, config: ServiceConfig | None = None,
                 clock: Clock | None = None, seed: bool = True):
        self.config = config or ServiceConfig()
        self.clock = clock or Clock()
        self.store = Store(
            self.config.storage_path,
            clock=lambda: now_iso(self.clock.now()),
        )
        from datetime import timedelta
        self.sessions = SessionManager(
            self.clock, timedelta(minutes=self.config.session_timeout_minutes))
        self.auth = AuthService(
            self.store, self.sessions, self.clock,
            challenge=ArithmeticChallenge(),
            challenge_for_elevated=self.config.challenge_for_elevated,
            max_attempts=self.config.lockout_threshold,
        )
        self.directory = DirectoryService(self.store)
        self.assets = AssetService(self.store)
        self.workflow = WorkflowService(self.store)
        self.audit = AuditService(self.store)
        self.search = SearchService(self.store)
        self.backups = BackupService(self.store, self.config.backup_dir)
        self.confirmations = ConfirmationBroker()
        self.scheduler: BackupScheduler | None = None
        if seed and self.store.is_empty():
            self.bootstrap()

    # -- bootstrap --

    def bootstrap(self) -> None:
        admin_digest = hash_password(self.config.admin_password)
        with self.store.transaction() as txn:
            txn.put("affln", Affiliation(UNIVERSITY_ID, "University", "UNIV",
                                         "University"))
            titles = {}
            for level, name in ((0, "Member"), (1, "Technical Staff"),
                                (2, "Department Administrator"), (3, "Controller")):
                title = Title(
                    title_id=txn.next_id(Family.USER),
                    title_code=f"T{level}",
                    title_name=name,
                    default_mask=LEVEL_MASKS[level],
                )
                titles[level] = title
                txn.put("title", title)
            admin = User(
                user_id=txn.next_id(Family.USER),
                user_code=self.config.admin_code,
                last_name="Administrator",
                first_name="System",
                password_digest=admin_digest,
            )
            txn.put("user", admin)
            role = UserRole(
                user_role_id=txn.next_id(Family.ROLE),
                user_id=admin.user_id,
                title_id=titles[3].title_id,
                affln_id=UNIVERSITY_ID,
            )
            txn.put("role", role)
            txn.put("acl", AclEntry(role.user_role_id, LEVEL_MASKS[3]))
            bldg = Building(txn.next_id(Family.LOCATION), "MAIN",
                            "Main Building", UNIVERSITY_ID)
            txn.put("bldg", bldg)
            loctype = LocationType(txn.next_id(Family.LOCATION), "ROOM", "Room")
            txn.put("loctype", loctype)
            txn.put("loc", Location(
                loc_id=txn.next_id(Family.LOCATION),
                parent_loc_id=bldg.bldg_id,
                loc_code="MAIN-0", loc_name="Main Storage",
                bldg_id=bldg.bldg_id, affln_id=UNIVERSITY_ID,
                status="Available", loc_type_id=loctype.loc_type_id,
            ))
            root = Category(txn.next_id(Family.CATEGORY), "0", "EQUIP", "Equipment")
            txn.put("cat", root)
            txn.put("cat", Category(txn.next_id(Family.CATEGORY), root.cat_id,
                                    "GENERAL", "General equipment"))
            for code, desc, mask, effect in (
                ("CHECKOUT", "Check out an item",
                 mask_of(Permission.APPROVE_L1), "checkout"),
                ("TRANSFER", "Transfer an item",
                 mask_of(Permission.APPROVE_L2), "transfer"),
                ("PROBLEM", "Report a problem",
                 mask_of(Permission.APPROVE_L1), ""),
                ("DISPOSAL", "Dispose of an item",
                 mask_of(Permission.APPROVE_L3), ""),
            ):
                txn.put("reqtype", RequestType(
                    req_type_id=txn.next_id(Family.USER),
                    req_type_code=code, description=desc,
                    required_mask=mask, effect=effect,
                ))
            txn.log(admin.user_id, "CREATE", "initial system data seeded")

    # -- two-phase confirmation --

    def confirm_or_pending(self, action: str, preview: str,
                           confirm_token: str | None) -> PendingConfirmation | None:
        """None means "go ahead"; otherwise the caller must return the token."""
        if action not in CONFIRMABLE_ACTIONS:
            return None
        if confirm_token is None:
            return self.confirmations.issue(action, preview)
        self.confirmations.redeem(confirm_token, action)
        return None

    # -- scheduling --

    def start_scheduler(self) -> BackupScheduler:
        self.scheduler = BackupScheduler(
            self.backups, Schedule(self.config.backup_schedule),
            self.config.backup_scope, self.clock)
        self.scheduler.start()
        return self.scheduler

    def stop(self) -> None:
        if self.scheduler is not None:
            self.scheduler.stop()
