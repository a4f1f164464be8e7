"""Embedded transactional record store.

Snapshot-isolated transactions with optimistic concurrency: readers see
the state as of transaction start, writers buffer until commit, and two
transactions touching the same record yield exactly one Conflict.  Every
committed transaction is appended to a JSON-lines WAL so committed data
and sequence positions survive a process kill.

Records are the frozen dataclasses from :mod:`uuis.models`; they are
never mutated in place, which makes snapshots cheap shallow copies.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any, Callable, Iterable, Optional

from .errors import Conflict, StorageFailure, ValidationError
from .ids import Family, encode_id
from .models import TABLES, LogRecord, now_iso

_LOG_SEQ = "__log__"
_ERROR_SEQ = "__error__"
_NOTIF_SEQ = "__notif__"


class Snapshot:
    """Immutable consistent view of every table."""

    def __init__(self, tables: dict[str, dict[Any, Any]]):
        self._tables = tables

    def get(self, table: str, pk):
        return self._tables[table].get(pk)

    def all(self, table: str) -> list:
        return [rec for _, rec in sorted(self._tables[table].items())]

    def find(self, table: str, predicate: Callable[[Any], bool]) -> list:
        return [rec for rec in self.all(table) if predicate(rec)]

    def count(self, table: str) -> int:
        return len(self._tables[table])

    def tables(self) -> Iterable[str]:
        return self._tables.keys()


class Transaction:
    """Read/write unit of work; use via ``with store.transaction():``."""

    def __init__(self, store: "Store", snapshot: Snapshot, start_seq: int, actor: str):
        self._store = store
        self._snap = snapshot
        self._start_seq = start_seq
        self.actor = actor
        self._writes: dict[tuple[str, Any], Any] = {}
        self._deletes: set[tuple[str, Any]] = set()
        self._seq_local: dict[str, int] = {}
        self._log_buffer: list[tuple[str, str, str, str]] = []

    # -- reads (snapshot overlaid with local writes) --

    def get(self, table: str, pk):
        key = (table, pk)
        if key in self._deletes:
            return None
        if key in self._writes:
            return self._writes[key]
        return self._snap.get(table, pk)

    def all(self, table: str) -> list:
        tdef = TABLES[table]
        merged = {getattr(r, tdef.pk): r for r in self._snap.all(table)}
        for (t, pk), rec in self._writes.items():
            if t == table:
                merged[pk] = rec
        for t, pk in self._deletes:
            if t == table:
                merged.pop(pk, None)
        return [rec for _, rec in sorted(merged.items())]

    def find(self, table: str, predicate: Callable[[Any], bool]) -> list:
        return [rec for rec in self.all(table) if predicate(rec)]

    # -- writes --

    def put(self, table: str, record) -> None:
        tdef = TABLES[table]
        if not isinstance(record, tdef.model):
            raise ValidationError(f"wrong record type for table {table}")
        pk = getattr(record, tdef.pk)
        self._deletes.discard((table, pk))
        self._writes[(table, pk)] = record

    def delete(self, table: str, pk) -> None:
        if table == "log":
            raise ValidationError("audit log is append-only")
        self._writes.pop((table, pk), None)
        self._deletes.add((table, pk))

    # -- sequences --

    def next_counter(self, seq: str | Family) -> int:
        name = seq.value if isinstance(seq, Family) else seq
        current = self._seq_local.get(name, self._store._seq_peek(name))
        self._seq_local[name] = current + 1
        return current

    def next_id(self, family: Family) -> str:
        return encode_id(family, self.next_counter(family))

    # -- audit channel --

    def log(self, subject_id: str, event_type: str, content: str,
            actor: Optional[str] = None) -> None:
        """Queue one append-only audit record for this transaction."""
        if len(event_type) > 10:
            raise ValidationError(f"event_type too long: {event_type}")
        self._log_buffer.append((actor or self.actor, subject_id, event_type, content[:255]))


class Store:
    """Table storage plus WAL durability and a fault-injection switch."""

    def __init__(self, path: str | Path | None = None, clock: Callable[[], str] = now_iso):
        self._tables: dict[str, dict[Any, Any]] = {code: {} for code in TABLES}
        self._versions: dict[tuple[str, Any], int] = {}
        self._seqs: dict[str, int] = {}
        self._commit_seq = 0
        self._lock = threading.RLock()
        self._clock = clock
        self._path = Path(path) if path else None
        self._fail_next = 0
        if self._path and self._path.exists():
            self._replay()

    # -- durability --

    def _replay(self) -> None:
        with self._path.open() as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                for table, rows in entry.get("writes", {}).items():
                    tdef = TABLES[table]
                    for row in rows:
                        rec = tdef.from_row(row)
                        self._tables[table][getattr(rec, tdef.pk)] = rec
                for table, pks in entry.get("deletes", {}).items():
                    for pk in pks:
                        if table in ("log", "error", "notif"):
                            pk = int(pk)
                        self._tables[table].pop(pk, None)
                for name, value in entry.get("seqs", {}).items():
                    self._seqs[name] = max(self._seqs.get(name, 0), value)

    def _persist(self, writes, deletes, seqs) -> None:
        if not self._path:
            return
        entry = {
            "writes": {
                table: [TABLES[table].to_row(rec) for rec in recs]
                for table, recs in writes.items()
            },
            "deletes": {table: [str(pk) for pk in pks] for table, pks in deletes.items()},
            "seqs": seqs,
        }
        with self._path.open("a") as fh:
            fh.write(json.dumps(entry) + "\n")
            fh.flush()

    # -- transactions --

    def transaction(self, actor: str = "0000000000") -> "_TxnContext":
        return _TxnContext(self, actor)

    def _begin(self, actor: str) -> Transaction:
        with self._lock:
            return Transaction(self, self.snapshot(), self._commit_seq, actor)

    def _seq_peek(self, name: str) -> int:
        with self._lock:
            return self._seqs.get(name, 0)

    def fail_next_commit(self, count: int = 1) -> None:
        """Deterministically raise StorageFailure on the next commits."""
        with self._lock:
            self._fail_next = count

    def _commit(self, txn: Transaction) -> None:
        with self._lock:
            if self._fail_next > 0:
                self._fail_next -= 1
                raise StorageFailure("injected storage fault")
            for key in list(txn._writes) + list(txn._deletes):
                if self._versions.get(key, 0) > txn._start_seq:
                    raise Conflict(f"record {key} modified concurrently")
            self._commit_seq += 1
            seq = self._commit_seq
            # materialize queued audit records with commit-ordered ids
            ts = self._clock()
            for actor, subject, event_type, content in txn._log_buffer:
                log_id = self._seqs.get(_LOG_SEQ, 0) + 1
                self._seqs[_LOG_SEQ] = log_id
                rec = LogRecord(log_id, ts, actor, subject, event_type, content)
                txn._writes[("log", log_id)] = rec
            writes: dict[str, list] = {}
            deletes: dict[str, list] = {}
            for (table, pk), rec in txn._writes.items():
                self._tables[table][pk] = rec
                self._versions[(table, pk)] = seq
                writes.setdefault(table, []).append(rec)
            for table, pk in txn._deletes:
                self._tables[table].pop(pk, None)
                self._versions[(table, pk)] = seq
                deletes.setdefault(table, []).append(pk)
            for name, value in txn._seq_local.items():
                self._seqs[name] = max(self._seqs.get(name, 0), value)
            self._persist(writes, deletes, dict(self._seqs))

    def next_int(self, seq_name: str) -> int:
        """Non-transactional monotonic counter (error/notification ids)."""
        with self._lock:
            value = self._seqs.get(seq_name, 0) + 1
            self._seqs[seq_name] = value
            return value

    # -- reads --

    def snapshot(self) -> Snapshot:
        with self._lock:
            return Snapshot({code: dict(recs) for code, recs in self._tables.items()})

    def get(self, table: str, pk):
        with self._lock:
            return self._tables[table].get(pk)

    def all(self, table: str) -> list:
        return self.snapshot().all(table)

    def is_empty(self) -> bool:
        with self._lock:
            return all(not recs for recs in self._tables.values())


class _TxnContext:
    def __init__(self, store: Store, actor: str):
        self._store = store
        self._actor = actor
        self._txn: Optional[Transaction] = None

    def __enter__(self) -> Transaction:
        self._txn = self._store._begin(self._actor)
        return self._txn

    def __exit__(self, exc_type, exc, tb) -> bool:
        if exc_type is None:
            self._store._commit(self._txn)
        return False
