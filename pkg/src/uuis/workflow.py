"""Request lifecycle: submit, view, cancel, approve/escalate, reject.

Statuses: InProcess -> {Approved, Rejected, Cancelled, Escalated, Locked};
Escalated -> {Approved, Rejected, Locked}; everything else is terminal.
An approver who lacks the request type's required permission escalates
the request to the next level instead (1 -> 2 -> 3).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import errors
from .accounts import user_level
from .auth import Session
from .ids import Family
from .models import (
    InventoryEntry,
    Notification,
    Request,
    RequestType,
    now_iso,
    touch,
)
from .permissions import Permission, approve_permission, level_of, mask_grants
from .store import Store

PENDING = {"InProcess", "Escalated"}
TERMINAL = {"Approved", "Rejected", "Cancelled", "Locked"}

LEGAL_TRANSITIONS: dict[str, set[str]] = {
    "InProcess": {"Approved", "Rejected", "Cancelled", "Escalated", "Locked"},
    "Escalated": {"Approved", "Rejected", "Locked"},
    "Approved": set(),
    "Rejected": set(),
    "Cancelled": set(),
    "Locked": set(),
}


def type_level(req_type: RequestType) -> int:
    return level_of(req_type.required_mask)


@dataclass
class RequestTransition:
    from_status: str
    to_status: str

    @property
    def legal(self) -> bool:
        return self.to_status in LEGAL_TRANSITIONS[self.from_status]


class WorkflowService:
    def __init__(self, store: Store):
        self._store = store

    # -- submission side --

    def submit_request(self, session: Session, req_type: str,
                       description: str, target: str | None = None,
                       on_behalf_of: str | None = None) -> Request:
        if not mask_grants(session.effective_mask, Permission.SUBMIT_REQUEST):
            raise errors.PermissionDenied("SubmitRequest required")
        if not description.strip():
            raise errors.ValidationError("description is required")
        if len(description) > 255:
            raise errors.ValidationError("description longer than 255 characters")
        snap = self._store.snapshot()
        rtype = snap.get("reqtype", req_type)
        if rtype is None:
            rtype = next(iter(snap.find(
                "reqtype", lambda t: t.req_type_code == req_type)), None)
        if rtype is None:
            raise errors.ValidationError(f"unknown request type {req_type}")
        if target is not None and snap.get("item", target) is None:
            raise errors.UnknownTarget(target)
        requester = session.user_id
        if on_behalf_of is not None:
            # delegation: an upper-level user submits for someone else
            if on_behalf_of != session.user_id and session.level < 1:
                raise errors.PermissionDenied("delegated submission needs level >= 1")
            if snap.get("user", on_behalf_of) is None:
                raise errors.ValidationError(f"unknown user {on_behalf_of}")
            requester = on_behalf_of
        with self._store.transaction(actor=session.user_id) as txn:
            request = Request(
                req_id=txn.next_id(Family.USER),
                requester=requester,
                req_type=rtype.req_type_id,
                submitted_by=session.user_id,
                description=description,
                date_submitted=now_iso(),
                item_id=target,
            )
            txn.put("req", request)
            txn.log(request.req_id, "CREATE",
                    f"request {rtype.req_type_code} submitted")
        return request

    def view_request_status(self, session: Session) -> list[Request]:
        reqs = self._store.snapshot().find(
            "req", lambda r: r.requester == session.user_id)
        return sorted(reqs, key=lambda r: (r.date_submitted, r.req_id), reverse=True)

    def cancel_request(self, session: Session, req_ids: set[str]) -> list[Request]:
        if not req_ids:
            raise errors.EmptySelection("no request selected")
        snap = self._store.snapshot()
        targets = []
        for req_id in sorted(req_ids):
            request = snap.get("req", req_id)
            if request is None or request.requester != session.user_id:
                raise errors.NotOwner(req_id)
            if request.status != "InProcess":
                raise errors.NotPending(f"request {req_id} is {request.status}")
            targets.append(request)
        cancelled = []
        with self._store.transaction(actor=session.user_id) as txn:
            for request in targets:
                updated = touch(request, status="Cancelled")
                txn.put("req", updated)
                txn.log(request.req_id, "CANCEL", "request cancelled by requester")
                cancelled.append(updated)
        return cancelled

    # -- approval side --

    def view_pending(self, session: Session) -> list[Request]:
        """Pending requests from strictly lower levels, plus the caller's own."""
        if session.level < 1:
            raise errors.PermissionDenied("approval level 1 or higher required")
        snap = self._store.snapshot()
        out = []
        for request in snap.find("req", lambda r: r.status in PENDING):
            if request.requester == session.user_id:
                out.append(request)
            elif request.status == "Escalated":
                if request.escalated_to == session.level:
                    out.append(request)
            elif user_level(snap, request.requester) < session.level:
                out.append(request)
        return sorted(out, key=lambda r: (r.date_submitted, r.req_id))

    def _pending_request(self, snap, req_id: str) -> tuple[Request, RequestType]:
        request = snap.get("req", req_id)
        if request is None:
            raise errors.UnknownTarget(req_id)
        if request.status not in PENDING:
            raise errors.NotPending(f"request {req_id} is {request.status}")
        rtype = snap.get("reqtype", request.req_type)
        return request, rtype

    def approve_request(self, session: Session, req_id: str,
                        formalization: dict | None = None) -> Request:
        if session.level < 1:
            raise errors.PermissionDenied("approval level 1 or higher required")
        snap = self._store.snapshot()
        request, rtype = self._pending_request(snap, req_id)
        if request.status == "Escalated" and session.level < request.escalated_to:
            raise errors.PermissionDenied(
                f"request escalated to level {request.escalated_to}")
        formalization = dict(formalization or {})
        demanded = type_level(rtype)
        if mask_grants(session.effective_mask, approve_permission(demanded)):
            return self._approve(session, request, rtype, formalization)
        # lacking the type's required grant: hand the request one level up
        next_level = min(session.level + 1, 3)
        if request.status == "Escalated" and next_level <= request.escalated_to:
            raise errors.PermissionDenied(
                f"request already escalated to level {request.escalated_to}")
        with self._store.transaction(actor=session.user_id) as txn:
            updated = touch(request, status="Escalated", escalated_to=next_level,
                            formalization=json.dumps(formalization)
                            if formalization else request.formalization)
            txn.put("req", updated)
            txn.log(request.req_id, "APPROVE",
                    f"escalated to level {next_level}")
        return updated

    def _approve(self, session: Session, request: Request,
                 rtype: RequestType, formalization: dict) -> Request:
        with self._store.transaction(actor=session.user_id) as txn:
            self._apply_effect(txn, session, request, rtype, formalization)
            updated = touch(
                request,
                status="Approved",
                approved_by=session.user_id,
                date_approved=now_iso(),
                escalated_to=0,
                formalization=json.dumps(formalization) if formalization else
                request.formalization,
            )
            txn.put("req", updated)
            txn.log(request.req_id, "APPROVE",
                    f"approved by level-{session.level} user")
        return updated

    def _apply_effect(self, txn, session: Session, request: Request,
                      rtype: RequestType, formalization: dict) -> None:
        if rtype.effect == "transfer":
            item = txn.get("item", request.item_id) if request.item_id else None
            if item is None:
                raise errors.MissingFields("transfer request has no target item")
            dest = formalization.get("loc_id")
            if not dest:
                raise errors.MissingFields("transfer approval needs a destination loc_id")
            if txn.get("loc", dest) is None:
                raise errors.UnknownTarget(dest)
            changes = {"loc_id": dest}
            if formalization.get("owner_id"):
                changes["owner_id"] = formalization["owner_id"]
            txn.put("item", touch(item, **changes))
            txn.log(item.item_id, "UPDATE",
                    f"transferred to {dest} per request {request.req_id}")
        elif rtype.effect == "checkout":
            if not request.item_id:
                raise errors.MissingFields("checkout request has no target item")
            entry = txn.get("inv", request.item_id)
            if entry is None or entry.qty < 1:
                raise errors.NotAvailable(request.item_id)
            qty = entry.qty - 1
            txn.put("inv", InventoryEntry(request.item_id, qty,
                                          "CheckedOut" if qty == 0 else "Available",
                                          session.user_id, now_iso()))
            item = txn.get("item", request.item_id)
            if item is not None and qty == 0:
                txn.put("item", touch(item, status="CheckedOut"))
            txn.log(request.item_id, "UPDATE",
                    f"item checked out per request {request.req_id}")

    def reject_request(self, session: Session, req_id: str,
                       comment: str = "") -> Request:
        if session.level < 1:
            raise errors.PermissionDenied("approval level 1 or higher required")
        snap = self._store.snapshot()
        request, _ = self._pending_request(snap, req_id)
        if request.status == "Escalated" and session.level < request.escalated_to:
            raise errors.PermissionDenied(
                f"request escalated to level {request.escalated_to}")
        try:
            with self._store.transaction(actor=session.user_id) as txn:
                updated = touch(request, status="Rejected",
                                approved_by=session.user_id,
                                date_approved=now_iso(),
                                comment=comment[:255])
                txn.put("req", updated)
                txn.put("notif", Notification(
                    note_id=txn.next_counter("notif") + 1,
                    user_id=request.requester,
                    req_id=request.req_id,
                    text=f"request rejected: {comment}"[:255],
                    created_at=now_iso(),
                ))
                txn.log(request.req_id, "REJECT", f"rejected: {comment}"[:255])
        except errors.StorageFailure:
            # the storage path failed mid-rejection; park the request
            with self._store.transaction(actor=session.user_id) as txn:
                txn.put("req", touch(request, status="Locked"))
                txn.log(request.req_id, "UPDATE", "request locked after storage error")
            raise
        return updated

    def notifications(self, session: Session) -> list[Notification]:
        return self._store.snapshot().find(
            "notif", lambda n: n.user_id == session.user_id)
