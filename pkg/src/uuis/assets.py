"""Item catalog: viewing, creation, bulk add, grouping, checkout.

Grouping keeps item→group membership a strict partition.  A grouping
call is resolved by the shape of the selection against existing groups:
create a new group, shrink a group to the selection, merge whole
groups, or split members out into a new group.  Groups left with fewer
than two members dissolve.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from . import errors
from .accounts import item_visible, scope_afflns, visible_items
from .auth import Session
from .ids import Family, decode_id
from .models import (
    Category,
    Group,
    InventoryEntry,
    Item,
    ItemProperty,
    now_iso,
    touch,
)
from .permissions import Permission, mask_grants
from .store import Store

ASSET_IMPORT_BASE_HEADER = [
    "item_description", "code", "serial_number", "cat_code", "owner_id", "loc_code",
]
PROPERTY_COLUMN_PREFIX = "prop:"

EDITABLE_ITEM_FIELDS = {
    "item_description", "code", "serial_number", "cat_id",
    "owner_id", "loc_id", "status",
}
ITEM_STATUSES = {"Available", "CheckedOut", "Retired"}


@dataclass
class GroupAction:
    """Computed resolution for a grouping selection."""

    resolution: str  # CreateGroup | NoOp | ShrinkGroup | RefuseHidden | MergeGroups | SplitAndRegroup
    needs_confirmation: bool
    detail: str = ""


@dataclass
class GroupOutcome:
    action: GroupAction
    group_id: str | None = None


@dataclass
class AssetImportReport:
    created: int = 0
    created_ids: list[str] = field(default_factory=list)


class AssetService:
    def __init__(self, store: Store):
        self._store = store

    # -- viewing --

    def view_assets(self, session: Session, filters: dict | None = None) -> list[Item]:
        items = visible_items(self._store.snapshot(), session.user_id,
                              session.effective_mask)
        for key, value in (filters or {}).items():
            if key not in {f for f in Item.__dataclass_fields__}:
                raise errors.ValidationError(f"unknown filter field {key}")
            items = [i for i in items if str(getattr(i, key)) == str(value)]
        return items

    def _require_manage(self, session: Session) -> None:
        if not mask_grants(session.effective_mask, Permission.MANAGE_ASSETS):
            raise errors.PermissionDenied("ManageAssets required")

    # -- creation --

    def _validate_item_refs(self, snap, cat_id: str, owner_id: str, loc_id: str) -> None:
        cat = snap.get("cat", cat_id)
        if cat is None or cat.parent_cat_id == "0":
            raise errors.UnknownReference(f"not a second-tier category: {cat_id}")
        if snap.get("loc", loc_id) is None:
            raise errors.UnknownReference(f"unknown location {loc_id}")
        family, _ = decode_id(owner_id)
        if family is Family.USER:
            if snap.get("user", owner_id) is None:
                raise errors.UnknownReference(f"unknown owner {owner_id}")
        elif family is Family.AFFILIATION:
            if snap.get("affln", owner_id) is None:
                raise errors.UnknownReference(f"unknown owner {owner_id}")
        else:
            raise errors.ValidationError(f"owner must be a member or affiliation: {owner_id}")

    def _allowed_props(self, snap, cat_id: str) -> dict[str, object]:
        """Property defs usable by items of ``cat_id`` (own or parent tier)."""
        cat = snap.get("cat", cat_id)
        cat_ids = {cat_id, cat.parent_cat_id} if cat else {cat_id}
        return {p.prop_id: p
                for p in snap.all("propdef") if p.cat_id in cat_ids}

    def add_asset(self, session: Session, fields: dict,
                  properties: list[tuple[str, str]] | None = None) -> Item:
        self._require_manage(session)
        required = {"item_description", "code", "serial_number", "cat_id",
                    "owner_id", "loc_id"}
        missing = required - set(fields)
        if missing:
            raise errors.ValidationError(f"missing fields: {sorted(missing)}")
        snap = self._store.snapshot()
        if snap.find("item", lambda i: i.serial_number == fields["serial_number"]):
            raise errors.DuplicateSerial(fields["serial_number"])
        if snap.find("item", lambda i: i.code == fields["code"]):
            raise errors.DuplicateCode(fields["code"])
        self._validate_item_refs(snap, fields["cat_id"], fields["owner_id"],
                                 fields["loc_id"])
        allowed = self._allowed_props(snap, fields["cat_id"])
        for prop_id, _ in properties or []:
            if prop_id not in allowed:
                raise errors.UnknownReference(
                    f"property {prop_id} not defined for category {fields['cat_id']}")
        with self._store.transaction(actor=session.user_id) as txn:
            item = Item(
                item_id=txn.next_id(Family.ITEM),
                item_description=fields["item_description"],
                code=fields["code"],
                serial_number=fields["serial_number"],
                cat_id=fields["cat_id"],
                owner_id=fields["owner_id"],
                loc_id=fields["loc_id"],
                date_modified=now_iso(),
                status="Available",
            )
            txn.put("item", item)
            txn.put("inv", InventoryEntry(item.item_id, 1, "Available",
                                          session.user_id, item.date_modified))
            for prop_id, value in properties or []:
                txn.put("itemprop", ItemProperty(
                    item_prop_id=txn.next_id(Family.ITEM_PROPERTY),
                    item_id=item.item_id, prop_id=prop_id, prop_value=value))
            txn.log(item.item_id, "CREATE", f"asset {item.code} added")
        return item

    # -- updates --

    def update_assets(self, session: Session, targets: set[str],
                      edits: dict) -> list[Item]:
        if not targets:
            raise errors.EmptySelection("no asset selected")
        self._require_manage(session)
        bad = set(edits) - EDITABLE_ITEM_FIELDS
        if bad:
            raise errors.ValidationError(f"fields not editable: {sorted(bad)}")
        if "status" in edits and edits["status"] not in ITEM_STATUSES:
            raise errors.ValidationError(f"unknown status {edits['status']}")
        snap = self._store.snapshot()
        scope = scope_afflns(snap, session.user_id)
        items = []
        for item_id in sorted(targets):
            item = snap.get("item", item_id)
            if item is None:
                raise errors.UnknownReference(f"unknown item {item_id}")
            if not item_visible(snap, item, session.user_id,
                                session.effective_mask, scope):
                raise errors.PermissionDenied(f"item {item_id} not visible")
            items.append(item)
        for unique_field in ("serial_number", "code"):
            if unique_field in edits:
                if len(items) > 1:
                    raise errors.ValidationError(
                        f"cannot set {unique_field} on multiple items")
                clash = snap.find("item", lambda i: getattr(i, unique_field) ==
                                  edits[unique_field] and i.item_id not in targets)
                if clash:
                    raise errors.ValidationError(
                        f"{unique_field} {edits[unique_field]} already in use")
        if "loc_id" in edits and snap.get("loc", edits["loc_id"]) is None:
            raise errors.ValidationError(f"unknown location {edits['loc_id']}")
        if "cat_id" in edits:
            self._validate_item_refs(snap, edits["cat_id"], items[0].owner_id,
                                     items[0].loc_id)
        updated = []
        with self._store.transaction(actor=session.user_id) as txn:
            for item in items:
                new_item = touch(item, **edits)
                txn.put("item", new_item)
                txn.log(item.item_id, "UPDATE",
                        f"asset fields {sorted(edits)} updated")
                updated.append(new_item)
        return updated

    # -- bulk add --

    def bulk_add_assets(self, session: Session, csv_text: str) -> AssetImportReport:
        self._require_manage(session)
        if not mask_grants(session.effective_mask, Permission.BULK_IMPORT):
            raise errors.PermissionDenied("BulkImport required")
        rows = list(csv.reader(io.StringIO(csv_text)))
        if not rows:
            raise errors.EmptyFile()
        header = [h.strip() for h in rows[0]]
        if header[:len(ASSET_IMPORT_BASE_HEADER)] != ASSET_IMPORT_BASE_HEADER:
            raise errors.MalformedHeader(
                f"expected leading columns {ASSET_IMPORT_BASE_HEADER}")
        prop_names = []
        for col in header[len(ASSET_IMPORT_BASE_HEADER):]:
            if not col.startswith(PROPERTY_COLUMN_PREFIX):
                raise errors.MalformedHeader(f"unexpected column {col}")
            prop_names.append(col[len(PROPERTY_COLUMN_PREFIX):])
        snap = self._store.snapshot()
        cats = {c.cat_code: c for c in snap.all("cat")}
        locs = {l.loc_code: l for l in snap.all("loc")}
        seen_serials = {i.serial_number for i in snap.all("item")}
        seen_codes = {i.code for i in snap.all("item")}
        parsed = []
        # whole file validates before anything commits
        for lineno, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise errors.RowFormatError(f"line {lineno}: wrong number of columns")
            rec = dict(zip(header, (c.strip() for c in row)))
            for col in ("item_description", "code", "serial_number"):
                if not rec[col]:
                    raise errors.RowFormatError(f"line {lineno}: missing {col}")
            if rec["serial_number"] in seen_serials:
                raise errors.RowFormatError(
                    f"line {lineno}: duplicate serial {rec['serial_number']}")
            if rec["code"] in seen_codes:
                raise errors.RowFormatError(
                    f"line {lineno}: duplicate code {rec['code']}")
            seen_serials.add(rec["serial_number"])
            seen_codes.add(rec["code"])
            cat = cats.get(rec["cat_code"])
            if cat is None or cat.parent_cat_id == "0":
                raise errors.RowFormatError(
                    f"line {lineno}: unknown category {rec['cat_code']}")
            loc = locs.get(rec["loc_code"])
            if loc is None:
                raise errors.RowFormatError(
                    f"line {lineno}: unknown location {rec['loc_code']}")
            try:
                self._validate_item_refs(snap, cat.cat_id, rec["owner_id"], loc.loc_id)
            except errors.UuisError as exc:
                raise errors.RowFormatError(f"line {lineno}: {exc.message}")
            allowed = {p.prop_name: p for p in
                       self._allowed_props(snap, cat.cat_id).values()}
            props = []
            for name in prop_names:
                value = rec.get(PROPERTY_COLUMN_PREFIX + name, "")
                if not value:
                    continue
                if name not in allowed:
                    raise errors.RowFormatError(
                        f"line {lineno}: property {name} not defined for "
                        f"category {rec['cat_code']}")
                props.append((allowed[name].prop_id, value))
            parsed.append((rec, cat, loc, props))
        report = AssetImportReport()
        with self._store.transaction(actor=session.user_id) as txn:
            for rec, cat, loc, props in parsed:
                item = Item(
                    item_id=txn.next_id(Family.ITEM),
                    item_description=rec["item_description"],
                    code=rec["code"],
                    serial_number=rec["serial_number"],
                    cat_id=cat.cat_id,
                    owner_id=rec["owner_id"],
                    loc_id=loc.loc_id,
                    date_modified=now_iso(),
                    status="Available",
                )
                txn.put("item", item)
                txn.put("inv", InventoryEntry(item.item_id, 1, "Available",
                                              session.user_id, item.date_modified))
                for prop_id, value in props:
                    txn.put("itemprop", ItemProperty(
                        item_prop_id=txn.next_id(Family.ITEM_PROPERTY),
                        item_id=item.item_id, prop_id=prop_id, prop_value=value))
                report.created += 1
                report.created_ids.append(item.item_id)
            txn.log(session.user_id, "IMPORT",
                    f"asset import: {report.created} created")
        return report

    # -- grouping --

    def resolve_grouping(self, session: Session, selected: set[str]) -> GroupAction:
        """Pure five-case analysis of a selection; no state change."""
        if not selected:
            raise errors.EmptySelection("no asset selected")
        snap = self._store.snapshot()
        scope = scope_afflns(snap, session.user_id)
        items = {}
        for item_id in selected:
            item = snap.get("item", item_id)
            if item is None:
                raise errors.UnknownReference(f"unknown item {item_id}")
            if not item_visible(snap, item, session.user_id,
                                session.effective_mask, scope):
                raise errors.PermissionDenied(f"item {item_id} not visible")
            items[item_id] = item
        groups = {i.group_id for i in items.values() if i.group_id}
        if not groups:
            return GroupAction("CreateGroup", needs_confirmation=False)
        members_by_group = {
            g: {i.item_id for i in snap.find("item", lambda it: it.group_id == g)}
            for g in groups
        }
        union = set().union(*members_by_group.values())
        if len(groups) == 1 and not any(i.group_id is None for i in items.values()):
            members = next(iter(members_by_group.values()))
            if members == selected:
                return GroupAction("NoOp", needs_confirmation=False,
                                   detail="selection already forms this group")
            if selected < members:
                remainder = members - selected
                for item_id in remainder:
                    rem = snap.get("item", item_id)
                    if not item_visible(snap, rem, session.user_id,
                                        session.effective_mask, scope):
                        return GroupAction("RefuseHidden", needs_confirmation=False,
                                           detail="group contains items not visible to you")
                return GroupAction("ShrinkGroup", needs_confirmation=True,
                                   detail=f"{len(remainder)} item(s) leave the group")
        if len(groups) >= 2 and union == selected:
            return GroupAction("MergeGroups", needs_confirmation=True,
                               detail=f"merge {len(groups)} groups")
        return GroupAction("SplitAndRegroup", needs_confirmation=True,
                           detail="selected items leave their groups and form a new one")

    def group_assets(self, session: Session, selected: set[str],
                     confirm: bool = False) -> GroupOutcome:
        action = self.resolve_grouping(session, selected)
        if action.resolution == "NoOp":
            raise errors.AlreadyGrouped(action.detail)
        if action.resolution == "RefuseHidden":
            raise errors.RefuseHidden(action.detail)
        if action.needs_confirmation and not confirm:
            raise errors.ConfirmationRequired(action.detail,
                                              resolution=action.resolution)
        with self._store.transaction(actor=session.user_id) as txn:
            group_id = self._apply_grouping(txn, action.resolution, selected)
            txn.log(group_id or session.user_id, "UPDATE",
                    f"grouping {action.resolution} over {len(selected)} item(s)")
        return GroupOutcome(action=action, group_id=group_id)

    def _apply_grouping(self, txn, resolution: str, selected: set[str]) -> str | None:
        items = {item_id: txn.get("item", item_id) for item_id in selected}
        if resolution == "CreateGroup":
            group_id = self._new_group(txn, selected)
            return group_id
        if resolution == "ShrinkGroup":
            group_id = next(iter(items.values())).group_id
            remainder = [i for i in txn.find("item", lambda it: it.group_id == group_id)
                         if i.item_id not in selected]
            for item in remainder:
                txn.put("item", touch(item, group_id=None))
            self._dissolve_if_small(txn, group_id)
            return group_id
        if resolution == "MergeGroups":
            old_groups = {i.group_id for i in items.values()}
            keep = min(old_groups)
            for item in items.values():
                if item.group_id != keep:
                    txn.put("item", touch(item, group_id=keep))
            for g in old_groups - {keep}:
                txn.delete("group", g)
            return keep
        if resolution == "SplitAndRegroup":
            old_groups = {i.group_id for i in items.values() if i.group_id}
            group_id = self._new_group(txn, selected)
            for g in old_groups:
                self._dissolve_if_small(txn, g)
            return group_id
        raise errors.ValidationError(f"unknown resolution {resolution}")

    def _new_group(self, txn, selected: set[str]) -> str | None:
        if len(selected) < 2:
            # singleton groups dissolve immediately; just ungroup the item
            for item_id in selected:
                item = txn.get("item", item_id)
                if item.group_id:
                    txn.put("item", touch(item, group_id=None))
            return None
        group_id = txn.next_id(Family.CATEGORY)
        txn.put("group", Group(group_id=group_id))
        for item_id in selected:
            txn.put("item", touch(txn.get("item", item_id), group_id=group_id))
        return group_id

    def _dissolve_if_small(self, txn, group_id: str) -> None:
        members = txn.find("item", lambda it: it.group_id == group_id)
        if len(members) < 2:
            for item in members:
                txn.put("item", touch(item, group_id=None))
            txn.delete("group", group_id)

    # -- checkout quantity tracking --

    def checkout_item(self, session: Session, item_id: str) -> InventoryEntry:
        snap = self._store.snapshot()
        entry = snap.get("inv", item_id)
        if entry is None:
            raise errors.UnknownReference(f"no inventory entry for {item_id}")
        if entry.qty < 1:
            raise errors.NotAvailable(f"item {item_id} has no available units")
        qty = entry.qty - 1
        updated = InventoryEntry(item_id, qty,
                                 "CheckedOut" if qty == 0 else "Available",
                                 session.user_id, now_iso())
        with self._store.transaction(actor=session.user_id) as txn:
            txn.put("inv", updated)
            item = txn.get("item", item_id)
            if item is not None and qty == 0:
                txn.put("item", touch(item, status="CheckedOut"))
            txn.log(item_id, "UPDATE", "item checked out")
        return updated

    def return_item(self, session: Session, item_id: str) -> InventoryEntry:
        snap = self._store.snapshot()
        entry = snap.get("inv", item_id)
        if entry is None:
            raise errors.UnknownReference(f"no inventory entry for {item_id}")
        checked_out = snap.find(
            "log", lambda r: r.item_id == item_id and "checked out" in r.content)
        returned = snap.find(
            "log", lambda r: r.item_id == item_id and "returned" in r.content)
        if len(checked_out) <= len(returned):
            raise errors.NotCheckedOut(f"item {item_id} has no outstanding checkout")
        qty = entry.qty + 1
        updated = InventoryEntry(item_id, qty, "Available",
                                 session.user_id, now_iso())
        with self._store.transaction(actor=session.user_id) as txn:
            txn.put("inv", updated)
            item = txn.get("item", item_id)
            if item is not None and item.status == "CheckedOut":
                txn.put("item", touch(item, status="Available"))
            txn.log(item_id, "UPDATE", "item returned")
        return updated
