"""Audit browsing, report generation, export, and error management.

The append-only log itself is written through the store's transaction
channel (``txn.log``); this module reads it back: category browsing with
drill-down, tabular reports, deterministic CSV/text export, and the
error-record list with operator annotations.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from . import errors
from .accounts import (
    affln_in_scope,
    item_affiliation,
    item_visible,
    scope_afflns,
    visible_items,
)
from .auth import Session
from .ids import affiliation_tier, AffiliationTier
from .models import ErrorRecord, LogRecord, now_iso
from .permissions import Permission, mask_grants
from .store import Store

AUDIT_CATEGORIES = ["asset", "time", "user", "department", "faculty"]

REPORT_CATEGORIES = {"locations", "assets", "users", "requests"}


@dataclass
class AuditSummary:
    subject_id: str
    event_count: int
    first_time: str
    last_time: str
    records: list[LogRecord] = field(default_factory=list)


@dataclass
class ReportSpec:
    category: str
    item_ids: set[str] = field(default_factory=set)
    facets: list[tuple[str, str, str]] = field(default_factory=list)  # (field, op, literal)


class AuditService:
    def __init__(self, store: Store):
        self._store = store

    # -- error capture (failure paths call this outside the failed txn) --

    def record_error(self, severity: str, message: str, context: str = "") -> ErrorRecord:
        with self._store.transaction() as txn:
            rec = ErrorRecord(
                error_id=txn.next_counter("error") + 1,
                log_time=now_iso(),
                severity=severity,
                message=message[:255],
                context=context[:255],
            )
            txn.put("error", rec)
        return rec

    # -- audit browsing --

    def audit_options(self, session: Session) -> list[str]:
        if not mask_grants(session.effective_mask, Permission.AUDIT):
            raise errors.PermissionDenied("Audit required")
        if session.level >= 3:
            return list(AUDIT_CATEGORIES)
        # below level 3 the faculty-wide view is withheld
        return [c for c in AUDIT_CATEGORIES if c != "faculty"]

    def audit_logs(self, session: Session, category: str, key) -> list[AuditSummary]:
        if category not in self.audit_options(session):
            raise errors.PermissionDenied(f"category {category} not available")
        snap = self._store.snapshot()
        records = snap.all("log")
        if category == "asset":
            if snap.get("item", key) is None:
                raise errors.UnknownKey(key)
            item = snap.get("item", key)
            if not item_visible(snap, item, session.user_id, session.effective_mask):
                raise errors.PermissionDenied(f"asset {key} outside your scope")
            records = [r for r in records if r.item_id == key]
        elif category == "time":
            start, end = key  # ISO timestamp pair
            records = [r for r in records if start <= r.log_time <= end]
        elif category == "user":
            if snap.get("user", key) is None:
                raise errors.UnknownKey(key)
            records = [r for r in records if r.user_id == key or r.item_id == key]
        elif category in ("department", "faculty"):
            affln = snap.get("affln", key)
            if affln is None:
                raise errors.UnknownKey(key)
            expected = (AffiliationTier.DEPARTMENT if category == "department"
                        else AffiliationTier.FACULTY)
            if affiliation_tier(key) is not expected:
                raise errors.UnknownKey(f"{key} is not a {category}")
            if session.level < 3 and not affln_in_scope(
                    key, scope_afflns(snap, session.user_id)):
                raise errors.PermissionDenied(f"{category} {key} outside your scope")
            subjects = self._affln_subjects(snap, key)
            records = [r for r in records
                       if r.item_id in subjects or r.user_id in subjects]
        else:
            raise errors.UnknownKey(category)
        summaries: dict[str, AuditSummary] = {}
        for rec in records:
            s = summaries.get(rec.item_id)
            if s is None:
                summaries[rec.item_id] = AuditSummary(
                    rec.item_id, 1, rec.log_time, rec.log_time, [rec])
            else:
                s.event_count += 1
                s.last_time = rec.log_time
                s.records.append(rec)
        return [summaries[k] for k in sorted(summaries)]

    def _affln_subjects(self, snap, affln_id: str) -> set[str]:
        """Entity ids living under an affiliation subtree."""
        subjects = {affln_id}
        for item in snap.all("item"):
            affln = item_affiliation(snap, item)
            if affln is not None and affln_in_scope(affln, {affln_id}):
                subjects.add(item.item_id)
        for role in snap.all("role"):
            if role.status == "Accepted" and affln_in_scope(role.affln_id, {affln_id}):
                subjects.add(role.user_id)
        for loc in snap.all("loc"):
            if affln_in_scope(loc.affln_id, {affln_id}):
                subjects.add(loc.loc_id)
        return subjects

    # -- reports --

    def produce_report(self, session: Session, spec: ReportSpec) -> list[dict]:
        if not mask_grants(session.effective_mask, Permission.REPORT):
            raise errors.PermissionDenied("Report required")
        if spec.category not in REPORT_CATEGORIES:
            raise errors.ValidationError(f"unknown report category {spec.category}")
        snap = self._store.snapshot()
        if spec.category == "assets":
            items = visible_items(snap, session.user_id, session.effective_mask)
            if spec.item_ids:
                items = [i for i in items if i.item_id in spec.item_ids]
            items = self._apply_facets(items, spec.facets)
            if not items:
                raise errors.NoVisibleData()
            counts: dict[str, int] = {}
            for item in items:
                counts[item.loc_id] = counts.get(item.loc_id, 0) + 1
            return [
                {"loc_id": loc_id,
                 "loc_code": getattr(snap.get("loc", loc_id), "loc_code", ""),
                 "item_count": counts[loc_id]}
                for loc_id in sorted(counts)
            ]
        if spec.category == "locations":
            items = visible_items(snap, session.user_id, session.effective_mask)
            locs = snap.all("loc")
            if session.level < 3:
                scope = scope_afflns(snap, session.user_id)
                locs = [l for l in locs if affln_in_scope(l.affln_id, scope)]
            if spec.item_ids:
                locs = [l for l in locs if l.loc_id in spec.item_ids]
            locs = self._apply_facets(locs, spec.facets)
            if not locs:
                raise errors.NoVisibleData()
            per_loc = {}
            for item in items:
                per_loc[item.loc_id] = per_loc.get(item.loc_id, 0) + 1
            return [
                {"loc_id": l.loc_id, "loc_code": l.loc_code, "loc_name": l.loc_name,
                 "status": l.status, "item_count": per_loc.get(l.loc_id, 0)}
                for l in locs
            ]
        if spec.category == "users":
            if session.level < 2:
                raise errors.NoVisibleData("user reports need level 2 or higher")
            roles = [r for r in snap.all("role") if r.status == "Accepted"]
            if session.level < 3:
                scope = scope_afflns(snap, session.user_id)
                roles = [r for r in roles if affln_in_scope(r.affln_id, scope)]
            counts: dict[str, int] = {}
            for role in roles:
                counts[role.affln_id] = counts.get(role.affln_id, 0) + 1
            if not counts:
                raise errors.NoVisibleData()
            return [{"affln_id": a, "member_count": counts[a]} for a in sorted(counts)]
        # requests
        reqs = snap.find("req", lambda r: r.requester == session.user_id) \
            if session.level < 1 else snap.all("req")
        if spec.item_ids:
            reqs = [r for r in reqs if r.req_id in spec.item_ids]
        reqs = self._apply_facets(reqs, spec.facets)
        if not reqs:
            raise errors.NoVisibleData()
        counts = {}
        for r in reqs:
            counts[r.status] = counts.get(r.status, 0) + 1
        return [{"status": s, "request_count": counts[s]} for s in sorted(counts)]

    @staticmethod
    def _apply_facets(rows, facets):
        for fname, op, literal in facets:
            if op == "eq":
                rows = [r for r in rows if str(getattr(r, fname, "")) == literal]
            elif op == "contains":
                rows = [r for r in rows if literal.lower() in
                        str(getattr(r, fname, "")).lower()]
            elif op == "lt":
                rows = [r for r in rows if str(getattr(r, fname, "")) < literal]
            elif op == "gt":
                rows = [r for r in rows if str(getattr(r, fname, "")) > literal]
            else:
                raise errors.ValidationError(f"unknown facet operator {op}")
        return rows

    # -- export --

    def export_view(self, session: Session, rows: list[dict],
                    fmt: str = "csv") -> bytes:
        if fmt not in ("csv", "text"):
            raise errors.UnknownFormat(fmt)
        if not rows:
            return b""
        columns = list(rows[0].keys())
        if fmt == "csv":
            out = io.StringIO()
            writer = csv.writer(out, lineterminator="\r\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow(["" if row.get(c) is None else row.get(c)
                                 for c in columns])
            return out.getvalue().encode()
        widths = {c: max(len(c), *(len(str(r.get(c, ""))) for r in rows))
                  for c in columns}
        lines = ["  ".join(c.ljust(widths[c]) for c in columns)]
        for row in rows:
            lines.append("  ".join(str(row.get(c, "")).ljust(widths[c])
                                   for c in columns))
        return ("\n".join(lines) + "\n").encode()

    # -- error management --

    def list_errors(self, session: Session, severity: str | None = None,
                    contains: str | None = None) -> list[ErrorRecord]:
        if not mask_grants(session.effective_mask, Permission.ERROR_MGMT):
            raise errors.PermissionDenied("ErrorMgmt required")
        records = self._store.snapshot().all("error")
        if severity:
            records = [r for r in records if r.severity == severity]
        if contains:
            records = [r for r in records if contains.lower() in r.message.lower()]
        return records

    def annotate_error(self, session: Session, error_id: int, note: str) -> ErrorRecord:
        if not mask_grants(session.effective_mask, Permission.ERROR_MGMT):
            raise errors.PermissionDenied("ErrorMgmt required")
        rec = self._store.get("error", error_id)
        if rec is None:
            raise errors.UnknownError(str(error_id))
        annotations = json.loads(rec.annotations) if rec.annotations else []
        annotations.append({"author": session.user_id, "time": now_iso(),
                            "text": note[:255]})
        updated = ErrorRecord(rec.error_id, rec.log_time, rec.severity,
                              rec.message, rec.context, json.dumps(annotations))
        with self._store.transaction(actor=session.user_id) as txn:
            txn.put("error", updated)
            txn.log(str(error_id), "UPDATE", "error annotated")
        return updated
