"""Entity records and the table registry.

Records are frozen dataclasses holding only str / int / None fields, so
any record serializes losslessly to a CSV row or a WAL line.  Timestamps
are ISO-8601 UTC strings at second resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dc_fields, replace
from datetime import datetime, timezone
from typing import Optional

from .ids import Family
from .permissions import FULL_MASK

CATEGORY_ROOT = "0"  # parent sentinel for first-tier categories


def now_iso(dt: datetime | None = None) -> str:
    dt = dt or datetime.now(timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0).isoformat()


@dataclass(frozen=True)
class Affiliation:
    affln_id: str
    affln_name: str
    affln_code: str
    tier: str  # University | Faculty | Department


@dataclass(frozen=True)
class Building:
    bldg_id: str
    bldg_code: str
    bldg_name: str
    affln_id: str


@dataclass(frozen=True)
class LocationType:
    loc_type_id: str
    type_code: str
    type_name: str


@dataclass(frozen=True)
class Location:
    loc_id: str
    parent_loc_id: str  # another location or a building id
    loc_code: str
    loc_name: str
    bldg_id: str
    affln_id: str
    status: str  # Available | Booked | InUse
    loc_type_id: str
    comment: str = ""


@dataclass(frozen=True)
class Category:
    cat_id: str
    parent_cat_id: str  # CATEGORY_ROOT for first tier
    cat_code: str
    description: str


@dataclass(frozen=True)
class Item:
    item_id: str
    item_description: str
    code: str            # tracking code, unique
    serial_number: str   # unique
    cat_id: str
    owner_id: str        # member or affiliation id
    loc_id: str
    date_modified: str
    status: str          # Available | CheckedOut | Retired
    group_id: Optional[str] = None


@dataclass(frozen=True)
class PropertyDef:
    prop_id: str
    cat_id: str
    prop_name: str
    default_value: str = ""


@dataclass(frozen=True)
class ItemProperty:
    item_prop_id: str
    item_id: str
    prop_id: str
    prop_value: str


@dataclass(frozen=True)
class Group:
    group_id: str
    description: str = ""


@dataclass(frozen=True)
class InventoryEntry:
    item_id: str
    qty: int
    status: str  # Available | CheckedOut
    modified_by: str
    date_modified: str


@dataclass(frozen=True)
class User:
    user_id: str
    user_code: str
    last_name: str
    first_name: str
    password_digest: str
    login_attempts: int = 0
    must_change_password: int = 0  # 0/1 flag


@dataclass(frozen=True)
class UserInfo:
    user_id: str
    email: str = ""
    dob: str = ""
    phone: str = ""
    mobile: str = ""
    street_address: str = ""


@dataclass(frozen=True)
class Title:
    title_id: str
    title_code: str
    title_name: str
    default_mask: int


@dataclass(frozen=True)
class UserRole:
    user_role_id: str
    user_id: str
    title_id: str
    affln_id: str
    status: str = "Accepted"


@dataclass(frozen=True)
class AclEntry:
    user_role_id: str
    mask: int


@dataclass(frozen=True)
class RequestType:
    req_type_id: str
    req_type_code: str
    description: str
    required_mask: int  # one ApproveLn bit
    effect: str = ""    # "" | transfer | checkout


@dataclass(frozen=True)
class Request:
    req_id: str
    requester: str
    req_type: str
    submitted_by: str
    description: str
    date_submitted: str
    status: str = "InProcess"
    item_id: Optional[str] = None
    approved_by: Optional[str] = None
    date_approved: Optional[str] = None
    escalated_to: int = 0   # demanded level while Escalated, else 0
    comment: str = ""
    formalization: str = ""  # JSON field-map captured at approval


@dataclass(frozen=True)
class LogRecord:
    log_id: int
    log_time: str
    user_id: str
    item_id: str  # subject entity id (item, location, user, ...)
    event_type: str
    content: str


@dataclass(frozen=True)
class ErrorRecord:
    error_id: int
    log_time: str
    severity: str
    message: str
    context: str = ""
    annotations: str = ""  # JSON list of {author, time, text}


@dataclass(frozen=True)
class Notification:
    note_id: int
    user_id: str
    req_id: str
    text: str
    created_at: str


@dataclass(frozen=True)
class TableDef:
    code: str            # table_code, <=10 chars
    name: str
    model: type
    pk: str
    family: Optional[Family]  # id family for sequence allocation
    min_mask: int = 0    # minimum permission to search this table

    @property
    def field_names(self) -> list[str]:
        return [f.name for f in dc_fields(self.model)]

    def to_row(self, record) -> list[str]:
        out = []
        for f in dc_fields(self.model):
            v = getattr(record, f.name)
            out.append("" if v is None else str(v))
        return out

    def from_row(self, row: list[str]):
        kwargs = {}
        for f, raw in zip(dc_fields(self.model), row):
            ann = str(f.type)
            if "int" in ann:
                kwargs[f.name] = int(raw)
            elif "Optional" in ann and raw == "":
                kwargs[f.name] = None
            else:
                kwargs[f.name] = raw
        return self.model(**kwargs)


TABLES: dict[str, TableDef] = {
    t.code: t
    for t in [
        TableDef("affln", "Affiliations", Affiliation, "affln_id", Family.AFFILIATION),
        TableDef("bldg", "Buildings", Building, "bldg_id", Family.LOCATION),
        TableDef("loctype", "LocationTypes", LocationType, "loc_type_id", Family.LOCATION),
        TableDef("loc", "Locations", Location, "loc_id", Family.LOCATION),
        TableDef("cat", "Categories", Category, "cat_id", Family.CATEGORY),
        TableDef("item", "Items", Item, "item_id", Family.ITEM),
        TableDef("propdef", "PropertyDefs", PropertyDef, "prop_id", Family.CATEGORY),
        TableDef("itemprop", "ItemProperties", ItemProperty, "item_prop_id", Family.ITEM_PROPERTY),
        TableDef("group", "Groups", Group, "group_id", Family.CATEGORY),
        TableDef("inv", "Inventory", InventoryEntry, "item_id", None),
        TableDef("user", "Users", User, "user_id", Family.USER, min_mask=FULL_MASK),
        TableDef("userinfo", "UserInfo", UserInfo, "user_id", None, min_mask=FULL_MASK),
        TableDef("title", "Titles", Title, "title_id", Family.USER),
        TableDef("role", "UserRoles", UserRole, "user_role_id", Family.ROLE),
        TableDef("acl", "AclEntries", AclEntry, "user_role_id", None),
        TableDef("reqtype", "RequestTypes", RequestType, "req_type_id", Family.USER),
        TableDef("req", "Requests", Request, "req_id", Family.USER),
        TableDef("log", "AuditLog", LogRecord, "log_id", None),
        TableDef("error", "ErrorLog", ErrorRecord, "error_id", None),
        TableDef("notif", "Notifications", Notification, "note_id", None),
    ]
}

__all__ = [n for n in dir() if not n.startswith("_")]


def touch(record, **changes):
    """Copy with updates plus a refreshed date_modified when present."""
    if "date_modified" in {f.name for f in dc_fields(record)} and "date_modified" not in changes:
        changes["date_modified"] = now_iso()
    return replace(record, **changes)
