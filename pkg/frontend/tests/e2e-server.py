"""Start a throwaway inventory gateway for the web-console end-to-end test.

Seeds one faculty/department with a few accounts and items, binds an
ephemeral port, prints ``PORT=<n>`` on stdout, and serves until killed.
"""

import socket
import sys
import tempfile

import uvicorn

from uuis import ServiceConfig, UuisService
from uuis.api import create_app
from uuis.auth import hash_password
from uuis.ids import Family
from uuis.models import (
    AclEntry,
    Affiliation,
    InventoryEntry,
    Item,
    Location,
    User,
    UserInfo,
    UserRole,
    now_iso,
)
from uuis.permissions import LEVEL_MASKS

ADMIN_PASSWORD = "Adm1nPass!"
PASSWORD = "Passw0rd!"


def seed(svc: UuisService) -> None:
    digest = hash_password(PASSWORD, salt="fixedsalt")
    store = svc.store
    with store.transaction() as txn:
        txn.put("affln", Affiliation("1110000000", "Science", "SCI", "Faculty"))
        txn.put("affln", Affiliation("1110000001", "Physics", "PHY",
                                     "Department"))
    snap = store.snapshot()
    bldg = snap.all("bldg")[0]
    loctype = snap.all("loctype")[0]
    with store.transaction() as txn:
        loc = Location(
            loc_id=txn.next_id(Family.LOCATION), parent_loc_id=bldg.bldg_id,
            loc_code="PHY-LAB", loc_name="Physics Lab", bldg_id=bldg.bldg_id,
            affln_id="1110000001", status="Available",
            loc_type_id=loctype.loc_type_id,
        )
        txn.put("loc", loc)
    users = {}
    for code, level in (("approver", 2), ("tech", 1), ("member", 0),
                        ("lockme", 0)):
        with store.transaction() as txn:
            user = User(
                user_id=txn.next_id(Family.USER), user_code=code,
                last_name=code.title(), first_name="Test",
                password_digest=digest,
            )
            txn.put("user", user)
            txn.put("userinfo", UserInfo(user.user_id,
                                         email=f"{code}@example.edu"))
            role = UserRole(
                user_role_id=txn.next_id(Family.ROLE), user_id=user.user_id,
                title_id="", affln_id="1110000001",
            )
            txn.put("role", role)
            txn.put("acl", AclEntry(role.user_role_id, LEVEL_MASKS[level]))
        users[code] = user
    cat_id = next(c.cat_id for c in store.snapshot().all("cat")
                  if c.parent_cat_id != "0")
    for code in ("SCOPE-1", "SCOPE-2", "LASER-1"):
        with store.transaction() as txn:
            item = Item(
                item_id=txn.next_id(Family.ITEM),
                item_description=f"bench {code.lower()}", code=code,
                serial_number=f"SN-{code}", cat_id=cat_id,
                owner_id=users["member"].user_id, loc_id=loc.loc_id,
                date_modified=now_iso(), status="Available",
            )
            txn.put("item", item)
            txn.put("inv", InventoryEntry(item.item_id, 1, "Available",
                                          "0000000000", item.date_modified))


def main() -> None:
    tmp = tempfile.mkdtemp(prefix="uuis-e2e-")
    svc = UuisService(ServiceConfig(admin_password=ADMIN_PASSWORD,
                                    backup_dir=f"{tmp}/backups"))
    seed(svc)
    app = create_app(svc)
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    print(f"PORT={port}", flush=True)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")


if __name__ == "__main__":
    sys.exit(main())
