"""Backup to CSV with post-export verification, restore, and scheduling.

Each backup writes one RFC-4180 CSV per table in scope (header row, rows
sorted by primary key) plus a manifest, then re-reads the files and
compares them row-by-row against the live store; the difference count is
recorded on the manifest.  Restore is the inverse into an empty store,
with file digests checked first and id sequences advanced past the
restored maxima.
"""

from __future__ import annotations

import csv
import hashlib
import io
import threading
from dataclasses import dataclass, field
from datetime import datetime, time as dtime, timedelta, timezone
from pathlib import Path

from . import errors
from .auth import Session
from .clock import Clock
from .models import TABLES, now_iso
from .permissions import Permission, mask_grants
from .store import Store

SCOPE_TABLES: dict[str, list[str]] = {
    "users": ["user", "userinfo", "role", "acl"],
    "university": ["affln", "bldg", "loctype", "loc", "title"],
    "inventory": ["cat", "item", "propdef", "itemprop", "group", "inv"],
    "requests": ["req", "reqtype"],
}
SCOPE_TABLES["all"] = (
    SCOPE_TABLES["users"] + SCOPE_TABLES["university"]
    + SCOPE_TABLES["inventory"] + SCOPE_TABLES["requests"]
    + ["log", "error", "notif"]
)

DAILY_MIDNIGHT = "daily@00:00"
WEEKLY = "weekly@sun 00:00"

_DAYS = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"]


@dataclass
class TableExport:
    table_code: str
    file_name: str
    row_count: int
    digest: str


@dataclass
class BackupManifest:
    backup_id: str
    started_at: str
    scope: str
    tables: list[TableExport] = field(default_factory=list)
    diff_count: int = 0
    directory: str = ""


def _table_csv(snapshot, table: str) -> bytes:
    tdef = TABLES[table]
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\r\n")
    writer.writerow(tdef.field_names)
    for rec in snapshot.all(table):
        writer.writerow(tdef.to_row(rec))
    return out.getvalue().encode()


def _parse_csv(data: bytes, table: str) -> list:
    tdef = TABLES[table]
    rows = list(csv.reader(io.StringIO(data.decode())))
    if not rows or rows[0] != tdef.field_names:
        raise errors.DigestMismatch(f"unexpected header in {table} export")
    return [tdef.from_row(row) for row in rows[1:]]


class BackupService:
    def __init__(self, store: Store, out_dir: str | Path):
        self._store = store
        self._out_dir = Path(out_dir)

    def run_backup(self, session: Session, scope: str) -> BackupManifest:
        if not mask_grants(session.effective_mask, Permission.BACKUP):
            raise errors.PermissionDenied("Backup required")
        return self.run_backup_direct(scope, actor=session.user_id)

    def run_backup_direct(self, scope: str, actor: str = "0000000000") -> BackupManifest:
        scope_key = scope.lower()
        if scope_key not in SCOPE_TABLES:
            raise errors.ValidationError(f"unknown backup scope {scope}")
        backup_id = f"b{self._store.next_int('backup'):06d}"
        target = self._out_dir / backup_id
        try:
            target.mkdir(parents=True, exist_ok=False)
        except OSError as exc:
            raise errors.StorageFailure(str(exc))
        snapshot = self._store.snapshot()
        manifest = BackupManifest(backup_id, now_iso(), scope_key,
                                  directory=str(target))
        for table in SCOPE_TABLES[scope_key]:
            data = _table_csv(snapshot, table)
            file_name = f"{table}.csv"
            (target / file_name).write_bytes(data)
            manifest.tables.append(TableExport(
                table, file_name, snapshot.count(table),
                hashlib.sha256(data).hexdigest()))
        manifest.diff_count = self._verify(target, manifest)
        self._write_manifest(target, manifest)
        with self._store.transaction(actor=actor) as txn:
            txn.log(actor, "BACKUP",
                    f"{backup_id} scope={scope_key} diff={manifest.diff_count}")
        return manifest

    def _verify(self, target: Path, manifest: BackupManifest) -> int:
        """Row-by-row comparison of the written files against the live store."""
        current = self._store.snapshot()
        diff = 0
        for export in manifest.tables:
            tdef = TABLES[export.table_code]
            exported = {getattr(r, tdef.pk): r for r in _parse_csv(
                (target / export.file_name).read_bytes(), export.table_code)}
            live = {getattr(r, tdef.pk): r
                    for r in current.all(export.table_code)}
            for pk in exported.keys() | live.keys():
                if exported.get(pk) != live.get(pk):
                    diff += 1
        return diff

    def _write_manifest(self, target: Path, manifest: BackupManifest) -> None:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\r\n")
        writer.writerow(["backup_id", "started_at", "scope", "diff_count"])
        writer.writerow([manifest.backup_id, manifest.started_at,
                         manifest.scope, manifest.diff_count])
        writer.writerow(["table_code", "file", "row_count", "digest"])
        for export in manifest.tables:
            writer.writerow([export.table_code, export.file_name,
                             export.row_count, export.digest])
        (target / "manifest.csv").write_text(out.getvalue())

    @staticmethod
    def read_manifest(directory: str | Path) -> BackupManifest:
        path = Path(directory) / "manifest.csv"
        if not path.exists():
            raise errors.StorageFailure(f"no manifest in {directory}")
        rows = list(csv.reader(io.StringIO(path.read_text())))
        head = rows[1]
        manifest = BackupManifest(head[0], head[1], head[2],
                                  diff_count=int(head[3]),
                                  directory=str(directory))
        for row in rows[3:]:
            manifest.tables.append(TableExport(row[0], row[1], int(row[2]), row[3]))
        return manifest

    @staticmethod
    def restore_from_backup(manifest: BackupManifest, target: Store) -> None:
        """Load a verified export into an empty store (admin context)."""
        if not target.is_empty():
            raise errors.NonEmptyTarget("restore target must be empty")
        directory = Path(manifest.directory)
        parsed: dict[str, list] = {}
        for export in manifest.tables:
            data = (directory / export.file_name).read_bytes()
            if hashlib.sha256(data).hexdigest() != export.digest:
                raise errors.DigestMismatch(export.file_name)
            parsed[export.table_code] = _parse_csv(data, export.table_code)
        with target.transaction() as txn:
            max_by_seq: dict[str, int] = {}
            for table, records in parsed.items():
                tdef = TABLES[table]
                for rec in records:
                    txn.put(table, rec)
                    pk = getattr(rec, tdef.pk)
                    if tdef.family is not None:
                        counter = int(str(pk)[1:])
                        name = tdef.family.value
                        max_by_seq[name] = max(max_by_seq.get(name, 0), counter + 1)
                    elif isinstance(pk, int):
                        name = {"log": "__log__", "error": "error",
                                "notif": "notif"}.get(table, table)
                        max_by_seq[name] = max(max_by_seq.get(name, 0), pk)
            for name, value in max_by_seq.items():
                txn._seq_local[name] = max(txn._seq_local.get(name, 0), value)


class Schedule:
    """Minimal recurring time spec: ``daily@HH:MM`` or ``weekly@ddd HH:MM``."""

    def __init__(self, spec: str):
        self.spec = spec
        try:
            kind, rest = spec.split("@", 1)
        except ValueError:
            raise errors.InvalidSchedule(spec)
        kind = kind.strip().lower()
        if kind == "daily":
            self.weekday = None
            clock_part = rest.strip()
        elif kind == "weekly":
            parts = rest.strip().split()
            if len(parts) != 2 or parts[0].lower() not in _DAYS:
                raise errors.InvalidSchedule(spec)
            self.weekday = _DAYS.index(parts[0].lower())
            clock_part = parts[1]
        else:
            raise errors.InvalidSchedule(spec)
        try:
            hour, minute = clock_part.split(":")
            self.at = dtime(int(hour), int(minute))
        except ValueError:
            raise errors.InvalidSchedule(spec)

    def next_fire(self, after: datetime) -> datetime:
        candidate = after.astimezone(timezone.utc).replace(
            hour=self.at.hour, minute=self.at.minute, second=0, microsecond=0)
        if self.weekday is None:
            if candidate <= after:
                candidate += timedelta(days=1)
            return candidate
        while candidate.weekday() != self.weekday or candidate <= after:
            candidate += timedelta(days=1)
        return candidate


class BackupScheduler:
    """Fires scoped backups at the configured schedule."""

    def __init__(self, backups: BackupService, schedule: Schedule,
                 scope: str = "all", clock: Clock | None = None):
        self._backups = backups
        self.schedule = schedule
        self._scope = scope
        self._clock = clock or Clock()
        self._next = schedule.next_fire(self._clock.now())
        self._timer: threading.Timer | None = None
        self.manifests: list[BackupManifest] = []

    @property
    def next_fire(self) -> datetime:
        return self._next

    def run_pending(self) -> list[BackupManifest]:
        """Deterministic tick: run every backup due by the clock's now."""
        fired = []
        now = self._clock.now()
        while self._next <= now:
            fired.append(self._backups.run_backup_direct(self._scope))
            self._next = self.schedule.next_fire(self._next)
        self.manifests.extend(fired)
        return fired

    def start(self) -> None:
        delay = max(0.0, (self._next - self._clock.now()).total_seconds())
        self._timer = threading.Timer(delay, self._fire)
        self._timer.daemon = True
        self._timer.start()

    def _fire(self) -> None:
        self.run_pending()
        self.start()

    def stop(self) -> None:
        if self._timer is not None:
            self._timer.cancel()
            self._timer = None


def schedule_backups(backups: BackupService, spec: str, scope: str = "all",
                     clock: Clock | None = None) -> BackupScheduler:
    return BackupScheduler(backups, Schedule(spec), scope, clock)
